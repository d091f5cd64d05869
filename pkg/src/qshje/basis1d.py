"""Pairs of real independent solutions of the 1D stationary Schrodinger equation.

A :class:`BasisPair` stores two solutions and their first derivatives on a
uniform grid. Between nodes the pair is evaluated with quintic Hermite
interpolation, using the second derivative ``(2m/hbar**2)(V - E) psi`` that
the equation itself supplies at every node. Closed-form pairs from
:func:`analytic_pair` carry their formulas and are evaluated exactly.

Numerov pairs (:func:`solve_numerov`) are anchored at ``x_min`` with initial
data ``(1, 0)`` and ``(0, 1/L)``. On domains containing deep classically
forbidden regions that pair loses its independence to round-off (both members
become dominated by the same growing exponential), which shows up as Wronskian
drift; the solver then falls back to better conditioned constructions, see
:func:`solve_numerov`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from . import kernels
from .errors import InvalidInput, NoEigenvalue, NumericalFailure
from .potentials import PhysicalConstants, Potential1D

DEFAULT_NODES = 4001
WRONSKIAN_RTOL = 1e-8
CONSTRUCTIONS = ("auto", "left-ic", "two-sided", "glued")


def _hermite_birkhoff_weights(offsets, degree=8):
    """Weights giving ``psi'(0) ~ sum(a*psi)/h + h*sum(b*psi'')`` on integer offsets.

    Exact for polynomials up to ``degree``; the minimum-norm solution is taken
    because symmetric windows leave the even-degree conditions redundant.
    """
    s = np.asarray(offsets, dtype=float)
    m = s.size
    mat = np.zeros((degree + 1, 2 * m))
    rhs = np.zeros(degree + 1)
    for p in range(degree + 1):
        mat[p, :m] = s**p
        if p >= 2:
            mat[p, m:] = p * (p - 1) * s ** (p - 2)
        rhs[p] = 1.0 if p == 1 else 0.0
    w = np.linalg.lstsq(mat, rhs, rcond=None)[0]
    return w[:m], w[m:]


_STENCILS = [_hermite_birkhoff_weights(np.arange(5) - j) for j in range(5)]


def stencil_derivative(values, second, h):
    """First derivative at every node from values and second derivatives.

    Uses five-node windows (centred in the interior, one-sided near the ends).
    """
    n = values.size
    if n < 5:
        raise InvalidInput("need at least five nodes for the derivative stencil")
    out = np.empty(n)
    a, b = _STENCILS[2]
    interior = slice(2, n - 2)
    acc_a = np.zeros(n - 4)
    acc_b = np.zeros(n - 4)
    for k in range(5):
        acc_a += a[k] * values[k : n - 4 + k]
        acc_b += b[k] * second[k : n - 4 + k]
    out[interior] = acc_a / h + h * acc_b
    for j, start in ((0, 0), (1, 0), (n - 2, n - 5), (n - 1, n - 5)):
        a, b = _STENCILS[j - start]
        out[j] = a @ values[start : start + 5] / h + h * (b @ second[start : start + 5])
    return out


@dataclass(frozen=True)
class BasisPair:
    """Two real independent solutions at one energy, tabulated on a grid.

    The Wronskian is ``W = psi1' psi2 - psi1 psi2'``; ``wronskian_ref`` is its
    value at the anchor of the construction.

    Attributes
    ----------
    grid : ndarray
        Strictly increasing nodes.
    values1, deriv1, values2, deriv2 : ndarray
        Solutions and first derivatives at the nodes.
    energy : float
    wronskian_ref : float
    potential : Potential1D
    constants : PhysicalConstants
    construction : str
        How the pair was built (``"left-ic"``, ``"two-sided"``, ``"glued"``
        or ``"analytic:<kind>"``).
    exact : callable, optional
        Closed form ``x -> (psi1, psi1', psi2, psi2')``; when present it is
        used for evaluation instead of interpolation.
    """

    grid: np.ndarray
    values1: np.ndarray
    deriv1: np.ndarray
    values2: np.ndarray
    deriv2: np.ndarray
    energy: float
    wronskian_ref: float
    potential: Potential1D
    constants: PhysicalConstants
    construction: str = "left-ic"
    exact: Optional[Callable] = field(default=None, repr=False, compare=False)
    anchor: float = float("nan")

    def __post_init__(self):
        arrays = {}
        for name in ("grid", "values1", "deriv1", "values2", "deriv2"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        grid = arrays["grid"]
        if grid.ndim != 1 or grid.size < 5 or np.any(np.diff(grid) <= 0):
            raise InvalidInput("grid must be a strictly increasing 1D array with at least 5 nodes")
        for name in ("values1", "deriv1", "values2", "deriv2"):
            if arrays[name].shape != grid.shape:
                raise InvalidInput(f"{name} is not aligned with the grid")
            if not np.all(np.isfinite(arrays[name])):
                raise NumericalFailure(f"{name} contains non-finite values")
        if not np.isfinite(self.wronskian_ref) or self.wronskian_ref == 0.0:
            raise InvalidInput("wronskian_ref must be finite and nonzero")
        object.__setattr__(self, "energy", float(self.energy))
        object.__setattr__(self, "wronskian_ref", float(self.wronskian_ref))
        q = self.constants.q_factor() * (self.potential(grid) - self.energy)
        for name, src in (("_second1", "values1"), ("_second2", "values2")):
            arr = q * arrays[src]
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def domain(self):
        return (float(self.grid[0]), float(self.grid[-1]))

    @property
    def second1(self):
        return self._second1

    @property
    def second2(self):
        return self._second2

    def wronskian(self):
        """Wronskian at every node."""
        return self.deriv1 * self.values2 - self.values1 * self.deriv2

    def wronskian_drift(self):
        """Return ``(max relative deviation from wronskian_ref, worst node index)``."""
        dev = np.abs(self.wronskian() - self.wronskian_ref) / abs(self.wronskian_ref)
        worst = int(np.argmax(dev))
        return float(dev[worst]), worst

    def _check(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.domain
        if np.any(~np.isfinite(x)) or np.any((x < lo) | (x > hi)):
            raise InvalidInput(f"evaluation point outside the pair's domain [{lo}, {hi}]")
        return x

    def evaluate(self, x):
        """Return ``(psi1, psi1', psi2, psi2')`` at the points ``x``."""
        x = self._check(x)
        if self.exact is not None:
            return tuple(np.asarray(v, dtype=float) for v in self.exact(x))
        v1, d1 = kernels.hermite_eval(self.grid, self.values1, self.deriv1, self._second1, x)
        v2, d2 = kernels.hermite_eval(self.grid, self.values2, self.deriv2, self._second2, x)
        return v1, d1, v2, d2

    def q(self, x):
        """``(2m/hbar**2)(V(x) - E)``, the ratio ``psi''/psi`` for every solution."""
        return self.constants.q_factor() * (self.potential(x) - self.energy)

    def combined(self, a, b):
        """Return ``a*psi1 + b*psi2`` as a new pair member (values, derivatives)."""
        return a * self.values1 + b * self.values2, a * self.deriv1 + b * self.deriv2


def eval_with_second_derivative(pair, potential, constants, x):
    """Values, first and second derivatives of both solutions at ``x``.

    The second derivatives come from the equation, ``psi'' = (2m/hbar**2)(V - E) psi``,
    applied to the interpolated values.
    """
    v1, d1, v2, d2 = pair.evaluate(x)
    q = constants.q_factor() * (potential(np.atleast_1d(np.asarray(x, dtype=float))) - pair.energy)
    return v1, d1, q * v1, v2, d2, q * v2


def eval_third_derivative(pair, x):
    """``(psi1''', psi2''')`` from the differentiated equation ``psi''' = q' psi + q psi'``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v1, d1, v2, d2 = pair.evaluate(x)
    k = pair.constants.q_factor()
    q = k * (pair.potential(x) - pair.energy)
    dq = k * pair.potential.derivative(x)
    return dq * v1 + q * d1, dq * v2 + q * d2


def ode_residual(pair):
    """Largest normalized residual of the 1D equation over interior nodes.

    The second derivative is approximated to fourth order with the
    three-point identity ``psi'' ~ d2(psi)/h**2 - d2(psi'')/12`` where the
    inner ``psi''`` is ``q psi``. Each node's residual
    ``-(hbar**2/2m) psi'' + (V - E) psi`` is divided by the local amplitude
    ``max |psi|`` over the stencil and by ``|E| + max|V|``.
    """
    grid = pair.grid
    h = np.diff(grid)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise InvalidInput("ode_residual needs a uniform grid")
    h = h[0]
    v = pair.potential(grid)
    scale = abs(pair.energy) + float(np.max(np.abs(v)))
    if scale == 0.0:
        scale = 1.0
    c = pair.constants.hbar**2 / (2.0 * pair.constants.mass)
    worst = 0.0
    for psi, sec in ((pair.values1, pair.second1), (pair.values2, pair.second2)):
        d2 = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / h**2
        d2 -= (sec[2:] - 2.0 * sec[1:-1] + sec[:-2]) / 12.0
        res = -c * d2 + (v[1:-1] - pair.energy) * psi[1:-1]
        amp = np.maximum(np.maximum(np.abs(psi[2:]), np.abs(psi[1:-1])), np.abs(psi[:-2]))
        amp[amp == 0.0] = 1.0
        worst = max(worst, float(np.max(np.abs(res) / amp)) / scale)
    return worst


# ---------------------------------------------------------------------------
# Numerov construction


def _first_step(potential, energy, constants, x0, psi, dpsi, h, substeps=64):
    """Advance ``(psi, psi')`` from ``x0`` by ``h`` with fine RK4 substeps."""
    k = constants.q_factor()

    def rhs(x, y):
        return np.array([y[1], k * (float(potential(np.array([x]))[0]) - energy) * y[0]])

    y = np.array([psi, dpsi], dtype=float)
    x = x0
    dt = h / substeps
    for _ in range(substeps):
        k1 = rhs(x, y)
        k2 = rhs(x + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = rhs(x + dt, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        x += dt
    return y[0]


def _sweep_from(f, grid, idx, direction, psi, dpsi, potential, energy, constants):
    """Numerov sweep starting at node ``idx`` with data ``(psi, psi')``.

    ``direction`` is +1 (towards larger x) or -1. Returns values on the
    nodes covered, in increasing-x order, starting or ending at ``idx``.
    """
    h = grid[1] - grid[0]
    step = direction * h
    psi1 = _first_step(potential, energy, constants, grid[idx], psi, dpsi, step)
    if direction > 0:
        seg = np.ascontiguousarray(f[idx:])
        return np.asarray(kernels.numerov_sweep(seg, step, psi, psi1))
    seg = np.ascontiguousarray(f[idx::-1])
    return np.asarray(kernels.numerov_sweep(seg, step, psi, psi1))[::-1]


def _rescale(y):
    m = np.max(np.abs(y))
    return y / m if m > 0 else y


def _glue_index(grid, ul, ur, dul, dur, q):
    """Node where both one-sided solutions sit near a local amplitude maximum."""
    allowed = q < 0
    if np.any(allowed):
        kloc = np.sqrt(np.max(-q[allowed]))
    else:
        allowed = np.ones_like(q, dtype=bool)
        kloc = 1.0 / (grid[-1] - grid[0])
    # weights in [0, 1]: |psi| / sqrt(psi^2 + (psi'/k)^2)
    wl = np.abs(ul) / np.maximum(np.hypot(ul, dul / kloc), np.finfo(float).tiny)
    wr = np.abs(ur) / np.maximum(np.hypot(ur, dur / kloc), np.finfo(float).tiny)
    score = np.where(allowed, wl * wr, -1.0)
    score[:2] = -1.0
    score[-2:] = -1.0
    return int(np.argmax(score)), kloc


def solve_numerov(potential, energy, constants=None, n_nodes=DEFAULT_NODES,
                  construction="auto", wronskian_rtol=WRONSKIAN_RTOL, refine=4):
    """Two independent solutions of the 1D equation by Numerov integration.

    Parameters
    ----------
    potential : Potential1D
    energy : float
    constants : PhysicalConstants, optional
    n_nodes : int
        Uniform grid size over ``potential.domain``; at least 16.
    construction : {"auto", "left-ic", "two-sided", "glued"}
        ``"left-ic"``: initial data ``(1, 0)`` and ``(0, 1/L)`` at ``x_min``.
        ``"two-sided"``: the first solution from ``(1, 0)`` at ``x_min``, the
        second from ``(1, 0)`` at ``x_max`` integrated leftwards.
        ``"glued"``: the first solution is the left-started solution joined to
        the right-started one at an interior node; the second starts there
        with data ``(0, k)`` and is integrated outwards. This is the only
        stable choice when ``energy`` is (numerically) an eigenvalue.
        ``"auto"`` tries them in this order and keeps the first whose
        Wronskian stays within ``wronskian_rtol``.
    wronskian_rtol : float
    refine : int
        The recurrence runs on a grid ``refine`` times finer than the
        reported one; node values and derivatives are subsampled from it.

    Returns
    -------
    BasisPair

    Raises
    ------
    InvalidInput
        Non-finite potential values or a bad node count.
    NumericalFailure
        No construction kept the Wronskian within tolerance; ``worst`` holds
        the offending node.
    """
    constants = constants or PhysicalConstants()
    if int(n_nodes) != n_nodes or n_nodes < 16:
        raise InvalidInput("n_nodes must be an integer >= 16")
    if construction not in CONSTRUCTIONS:
        raise InvalidInput(f"construction must be one of {CONSTRUCTIONS}")
    if int(refine) != refine or refine < 1:
        raise InvalidInput("refine must be a positive integer")
    energy = float(energy)
    if not np.isfinite(energy):
        raise InvalidInput("energy must be finite")
    refine = int(refine)
    grid = np.linspace(potential.domain[0], potential.domain[1], int(n_nodes))
    v = potential(grid)
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise InvalidInput(f"potential is not finite at x = {grid[bad]!r}")
    # integrate on a refined grid, report on the requested one
    fine = np.linspace(grid[0], grid[-1], (grid.size - 1) * refine + 1)
    vf = potential(fine)
    if not np.all(np.isfinite(vf)):
        bad = int(np.flatnonzero(~np.isfinite(vf))[0])
        raise InvalidInput(f"potential is not finite at x = {fine[bad]!r}")
    q = constants.q_factor() * (vf - energy)
    hf = fine[1] - fine[0]
    length = potential.length
    n = fine.size

    def sweep(idx, direction, psi, dpsi):
        return _sweep_from(q, fine, idx, direction, psi, dpsi, potential, energy, constants)

    def finish(y1, y2, w_ref, kind, anchor):
        d1 = stencil_derivative(y1, q * y1, hf)[::refine]
        d2 = stencil_derivative(y2, q * y2, hf)[::refine]
        if kind == "left-ic":
            # keep the initial data exact at the anchor node
            d1[0], d2[0] = 0.0, 1.0 / length
        return BasisPair(grid, y1[::refine], d1, y2[::refine], d2, energy, w_ref, potential,
                         constants, construction=kind, anchor=float(anchor))

    order = ("left-ic", "two-sided", "glued") if construction == "auto" else (construction,)
    attempts = []
    cache = {}

    def left_solution():
        if "ul" not in cache:
            cache["ul"] = sweep(0, +1, 1.0, 0.0)
        return cache["ul"]

    def right_solution():
        if "ur" not in cache:
            cache["ur"] = sweep(n - 1, -1, 1.0, 0.0)
        return cache["ur"]

    for kind in order:
        with np.errstate(over="ignore", invalid="ignore"):
            if kind == "left-ic":
                y1 = left_solution()
                y2 = sweep(0, +1, 0.0, 1.0 / length)
                if not (np.all(np.isfinite(y1)) and np.all(np.isfinite(y2))):
                    attempts.append((kind, np.inf, 0))
                    continue
                pair = finish(y1, y2, -1.0 / length, kind, grid[0])
            elif kind == "two-sided":
                ul, ur = left_solution(), right_solution()
                if not (np.all(np.isfinite(ul)) and np.all(np.isfinite(ur))):
                    attempts.append((kind, np.inf, 0))
                    continue
                y1, y2 = _rescale(ul), _rescale(ur)
                d1 = stencil_derivative(y1, q * y1, hf)
                d2 = stencil_derivative(y2, q * y2, hf)
                w = d1 * y2 - y1 * d2
                # reference where the two products cancel least
                terms = np.abs(d1 * y2) + np.abs(y1 * d2)
                ratio = np.where(terms > 0, terms / np.maximum(np.abs(w), 1e-300), np.inf)
                j = int(np.argmin(ratio))
                if w[j] == 0.0:
                    attempts.append((kind, np.inf, 0))
                    continue
                pair = finish(y1, y2, w[j], kind, fine[j])
            else:
                ul, ur = left_solution(), right_solution()
                if not (np.all(np.isfinite(ul)) and np.all(np.isfinite(ur))):
                    attempts.append((kind, np.inf, 0))
                    continue
                dul = stencil_derivative(ul, q * ul, hf)
                dur = stencil_derivative(ur, q * ur, hf)
                m, kloc = _glue_index(fine, ul, ur, dul, dur, q)
                if ul[m] == 0.0 or ur[m] == 0.0:
                    attempts.append((kind, np.inf, m // refine))
                    continue
                g = np.empty(n)
                g[: m + 1] = ul[: m + 1] / ul[m]
                g[m:] = ur[m:] / ur[m]
                left = sweep(m, -1, 0.0, kloc)
                right = sweep(m, +1, 0.0, kloc)
                y2 = np.concatenate([left[:-1], right])
                if not np.all(np.isfinite(y2)):
                    attempts.append((kind, np.inf, m // refine))
                    continue
                pair = finish(g, y2, -kloc, kind, fine[m])
                # the recurrence conserves a value slightly off the seeded -k
                pair = finish(g, y2, float(np.median(pair.wronskian())), kind, fine[m])
        drift, worst = pair.wronskian_drift()
        attempts.append((kind, drift, worst))
        if drift < wronskian_rtol:
            return pair

    kind, drift, worst = min(attempts, key=lambda a: a[1])
    raise NumericalFailure(
        f"Wronskian drift {drift:.3e} exceeds {wronskian_rtol:.1e} "
        f"(best construction {kind!r}, worst node x = {grid[worst]!r})",
        worst=float(grid[worst]),
        value=float(drift),
    )


# ---------------------------------------------------------------------------
# Closed-form catalog

ANALYTIC_KINDS = ("free", "evanescent", "harmonic-ground")


def analytic_pair(kind, parameters, constants=None, domain=(0.0, 2.0 * np.pi), n_nodes=DEFAULT_NODES):
    """A closed-form basis pair from a small catalog.

    Parameters
    ----------
    kind : {"free", "evanescent", "harmonic-ground"}
        ``free``: ``(sin kx, cos kx)`` on a constant potential ``v0`` (default
        0) with ``E = v0 + (hbar k)**2 / 2m``; W = k.
        ``evanescent``: ``(exp(kappa x), exp(-kappa x))`` on a constant
        potential ``v0`` with ``E = v0 - (hbar kappa)**2 / 2m < v0``; W = 2 kappa.
        ``harmonic-ground``: the Gaussian ground state of
        ``V = m omega**2 x**2 / 2`` and its reduction-of-order partner
        ``g(x) * int_0^x g**-2``; W = -1.
    parameters : dict
        ``{"k": ...}``, ``{"kappa": ...}`` or ``{"omega": ...}``; ``v0``
        optional for the first two. ``energy`` may be given instead of ``k``
        or ``kappa``.
    constants : PhysicalConstants, optional
    domain : tuple of float
    n_nodes : int
    """
    constants = constants or PhysicalConstants()
    hbar, m = constants.hbar, constants.mass
    p = dict(parameters)
    grid = np.linspace(float(domain[0]), float(domain[1]), int(n_nodes))
    if kind == "free":
        v0 = float(p.get("v0", 0.0))
        if "k" in p:
            k = float(p["k"])
        elif "energy" in p:
            if float(p["energy"]) <= v0:
                raise InvalidInput("free pair needs E > v0")
            k = np.sqrt(2.0 * m * (float(p["energy"]) - v0)) / hbar
        else:
            raise InvalidInput("free pair needs 'k' or 'energy'")
        if not k > 0:
            raise InvalidInput("free pair needs k > 0")
        energy = v0 + (hbar * k) ** 2 / (2.0 * m)
        potential = Potential1D.constant(v0, domain) if v0 != 0.0 else Potential1D.free(domain)

        def exact(x):
            s, c = np.sin(k * x), np.cos(k * x)
            return s, k * c, c, -k * s

        w_ref = k
    elif kind == "evanescent":
        v0 = float(p.get("v0", 0.0))
        if "kappa" in p:
            kappa = float(p["kappa"])
        elif "energy" in p:
            if float(p["energy"]) >= v0:
                raise InvalidInput("evanescent pair needs E < v0")
            kappa = np.sqrt(2.0 * m * (v0 - float(p["energy"]))) / hbar
        else:
            raise InvalidInput("evanescent pair needs 'kappa' or 'energy'")
        if not kappa > 0:
            raise InvalidInput("evanescent pair needs E < v0 (kappa > 0)")
        energy = v0 - (hbar * kappa) ** 2 / (2.0 * m)
        potential = Potential1D.constant(v0, domain) if v0 != 0.0 else Potential1D.free(domain)

        def exact(x):
            ep, em = np.exp(kappa * x), np.exp(-kappa * x)
            return ep, kappa * ep, em, -kappa * em

        w_ref = 2.0 * kappa
    elif kind == "harmonic-ground":
        omega = float(p.get("omega", 1.0))
        if not omega > 0:
            raise InvalidInput("harmonic-ground pair needs omega > 0")
        if "energy" in p and not np.isclose(float(p["energy"]), 0.5 * hbar * omega, rtol=1e-12):
            raise InvalidInput("harmonic-ground pair exists only at E = hbar*omega/2")
        energy = 0.5 * hbar * omega
        a = m * omega / hbar
        sa = np.sqrt(a)
        potential = Potential1D.harmonic(m * omega**2, domain)

        def exact(x):
            g = np.exp(-0.5 * a * x * x)
            dg = -a * x * g
            # int_0^x exp(a t^2) dt = exp(a x^2) * dawsn(sqrt(a) x) / sqrt(a)
            dw = special.dawsn(sa * x)
            partner = np.exp(0.5 * a * x * x) * dw / sa
            dpartner = a * x * partner + np.exp(0.5 * a * x * x) * (1.0 - 2.0 * sa * x * dw)
            return g, dg, partner, dpartner

        w_ref = -1.0
    else:
        raise InvalidInput(f"analytic kind must be one of {ANALYTIC_KINDS}")
    v1, d1, v2, d2 = exact(grid)
    return BasisPair(grid, v1, d1, v2, d2, energy, w_ref, potential, constants,
                     construction=f"analytic:{kind}", exact=exact, anchor=float(grid[0]))


# ---------------------------------------------------------------------------
# Bound states


def _shooting_mismatch(potential, energy, constants, grid, m_idx):
    q = constants.q_factor() * (potential(grid) - energy)
    n = grid.size
    with np.errstate(over="ignore", invalid="ignore"):
        ul = _sweep_from(q[: m_idx + 3], grid[: m_idx + 3], 0, +1, 0.0, 1.0, potential, energy, constants)
        ur = _sweep_from(q[m_idx - 2 :], grid[m_idx - 2 :], n - m_idx + 1, -1, 0.0, -1.0,
                         potential, energy, constants)
    h = grid[1] - grid[0]
    seg_l = ul[m_idx - 2 : m_idx + 3]
    seg_r = ur[:5]
    qs = q[m_idx - 2 : m_idx + 3]
    a, b = _STENCILS[2]
    dl = a @ seg_l / h + h * (b @ (qs * seg_l))
    dr = a @ seg_r / h + h * (b @ (qs * seg_r))
    l0, r0 = seg_l[2], seg_r[2]
    w = dl * r0 - l0 * dr
    # least-squares factor taking (l0, dl) onto (r0, dr); robust when l0 ~ 0
    scale = (l0 * r0 + dl * dr) / (l0 * l0 + dl * dl)
    return w / (np.hypot(l0, dl) * np.hypot(r0, dr)), ul, ur, scale


def find_bound_energy(potential, constants=None, node_count=0, bracket=(0.0, 1.0),
                      n_nodes=DEFAULT_NODES, tol=1e-12, max_iter=200):
    """Bound-state energy inside ``bracket`` by shooting and bisection.

    Solutions vanishing at ``x_min`` and at ``x_max`` are integrated towards
    the potential minimum and their normalized Wronskian there is bisected
    to zero. The eigenfunction is then checked for ``node_count`` sign
    changes.

    Raises
    ------
    NoEigenvalue
        The mismatch has no sign change over the bracket, or the located
        state has the wrong number of nodes.
    """
    constants = constants or PhysicalConstants()
    lo, hi = (float(v) for v in bracket)
    if not lo < hi:
        raise InvalidInput("bracket must satisfy lo < hi")
    grid = np.linspace(potential.domain[0], potential.domain[1], int(n_nodes))
    v = potential(grid)
    if not np.all(np.isfinite(v)):
        raise InvalidInput("potential is not finite on the grid")
    m_idx = int(np.clip(np.argmin(v), 3, grid.size - 4))

    f_lo = _shooting_mismatch(potential, lo, constants, grid, m_idx)[0]
    f_hi = _shooting_mismatch(potential, hi, constants, grid, m_idx)[0]
    if not (np.isfinite(f_lo) and np.isfinite(f_hi)) or f_lo * f_hi > 0:
        raise NoEigenvalue(f"no sign change of the shooting mismatch over [{lo}, {hi}]",
                           worst=(lo, hi), value=(float(f_lo), float(f_hi)))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = _shooting_mismatch(potential, mid, constants, grid, m_idx)[0]
        if f_mid == 0.0:
            lo = hi = mid
            break
        if f_lo * f_mid < 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    energy = 0.5 * (lo + hi)

    _, ul, ur, scale = _shooting_mismatch(potential, energy, constants, grid, m_idx)
    left = ul[: m_idx + 1]
    right = ur[2:]
    psi = np.concatenate([left[:-1] * scale, right])
    amp = np.max(np.abs(psi))
    significant = psi[np.abs(psi) > 1e-8 * amp]
    nodes = int(np.count_nonzero(np.diff(np.sign(significant)) != 0))
    if nodes != node_count:
        raise NoEigenvalue(
            f"eigenvalue {energy!r} in the bracket has {nodes} nodes, expected {node_count}",
            worst=energy, value=nodes,
        )
    return energy

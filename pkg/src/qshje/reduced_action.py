"""Reduced action ``S0 = hbar*arctan(psi1/psi2) + hbar*l``, amplitude ``R`` and residuals.

All derivatives are assembled analytically from the axis factors; second
derivatives of the factors come from the Schrodinger equation itself.
Functions accept one point or an ``(n, d)`` batch; a single point returns
scalars.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import BranchPoint, ExcludedPoint, InvalidInput, RealWavefunction, UndefinedPhase
from .potentials import PhysicalConstants
from .product_basis import ActionParams, ProductBasis

DEGENERATE_GRADU_RTOL = 1e-12

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QshjeSolution:
    """A reduced action: product basis plus ``(nu, mu, l)``."""

    basis: ProductBasis
    params: ActionParams
    constants: PhysicalConstants = None

    def __post_init__(self):
        if self.params.nu.size != self.basis.size:
            raise InvalidInput(
                f"parameters have {self.params.nu.size} entries, the basis has {self.basis.size}"
            )
        if self.constants is None:
            object.__setattr__(self, "constants", self.basis.constants)
        elif self.constants != self.basis.constants:
            raise InvalidInput("solution constants differ from the basis constants")

    @property
    def dimension(self):
        return self.basis.dimension

    @property
    def energy(self):
        return self.basis.energy

    def energy_scale(self):
        """``|E| + sum_a max|V_a|``, the normalization of energy-valued residuals."""
        return (abs(self.energy) + self.basis.max_potential()) or 1.0

    def with_params(self, params):
        return QshjeSolution(self.basis, params, self.constants)

    def fields(self, points):
        """``psi1, psi2`` with gradients and Laplacians at a batch of points."""
        phi, grad, lap = self.basis.evaluate(points)
        nu, mu = self.params.nu, self.params.mu
        return (
            phi @ nu,
            phi @ mu,
            np.einsum("nid,i->nd", grad, nu),
            np.einsum("nid,i->nd", grad, mu),
            lap @ nu,
            lap @ mu,
        )


def _single(sol, point):
    return np.ndim(point) == 0 or (np.ndim(point) == 1 and sol.dimension > 1)


def _out(single, arr):
    return arr[0] if single else arr


def _check_phase(points, psi1, psi2):
    bad = (psi1 == 0.0) & (psi2 == 0.0)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise UndefinedPhase("psi1 and psi2 vanish together", detail={"point": np.atleast_2d(points)[k].tolist()})


def eval_s0(sol, point):
    """Principal-branch ``S0 = hbar*atan2(psi1, psi2) + hbar*l``.

    Raises
    ------
    UndefinedPhase
        Where ``psi1 = psi2 = 0``.
    """
    single = _single(sol, point)
    phi, _, _ = sol.basis.evaluate(point)
    psi1, psi2 = phi @ sol.params.nu, phi @ sol.params.mu
    _check_phase(point, psi1, psi2)
    hbar = sol.constants.hbar
    return _out(single, hbar * np.arctan2(psi1, psi2) + hbar * sol.params.l)


def s0_along_path(sol, points):
    """``S0`` along an ordered path of points, continuous across branch jumps.

    The two-argument arctangent is unwrapped, so the path should be sampled
    finely enough that the phase moves by less than ``pi`` between points.
    """
    phi, _, _ = sol.basis.evaluate(points)
    psi1, psi2 = phi @ sol.params.nu, phi @ sol.params.mu
    _check_phase(points, psi1, psi2)
    hbar = sol.constants.hbar
    return hbar * np.unwrap(np.arctan2(psi1, psi2)) + hbar * sol.params.l


def phase_numerator(sol, points):
    """``N = psi2 grad psi1 - psi1 grad psi2`` and the size of the terms summing to it.

    Expanding in the products, ``N = sum_ij nu_i mu_j (phi_j grad phi_i - phi_i grad phi_j)``
    and each bracket reduces to the other axes' factors times one axis
    Wronskian ``f1' f2 - f1 f2'``. This avoids the cancellation of the direct
    formula where both ``psi`` are dominated by one growing factor.
    Returns arrays of shape ``(n, d)`` and ``(n,)``.
    """
    basis = sol.basis
    av = basis.axis_values(points)
    n, d, _ = av.value.shape
    sel = basis.selectors
    cols = np.arange(d)
    fv = av.value[:, cols, sel]  # (n, 2**d, d)
    w = av.first[:, :, 0] * av.value[:, :, 1] - av.value[:, :, 0] * av.first[:, :, 1]  # (n, d)
    coef = np.outer(sol.params.nu, sol.params.mu)
    num = np.empty((n, d))
    scale = np.zeros(n)
    for b in range(d):
        sign = (sel[None, :, b] - sel[:, None, b]).astype(float)  # +1 for (0, 1), -1 for (1, 0)
        others = np.delete(np.arange(d), b)
        g = np.ones((n,) + coef.shape)
        for a in others:
            g *= fv[:, :, None, a] * fv[:, None, :, a]
        t = coef * sign * g
        num[:, b] = t.sum(axis=(1, 2)) * w[:, b]
        scale += np.abs(t).sum(axis=(1, 2)) * np.abs(w[:, b])
    return num, scale


def grad_s0(sol, point):
    """``hbar (psi2 grad psi1 - psi1 grad psi2) / (psi1**2 + psi2**2)``."""
    single = _single(sol, point)
    pts = sol.basis._points(point)
    phi, _, _ = sol.basis.evaluate(pts)
    psi1, psi2 = phi @ sol.params.nu, phi @ sol.params.mu
    _check_phase(pts, psi1, psi2)
    num, _ = phase_numerator(sol, pts)
    p = psi1 * psi1 + psi2 * psi2
    return _out(single, sol.constants.hbar * num / p[:, None])


def eval_r(sol, point):
    """``R = sqrt(psi1**2 + psi2**2)``."""
    single = _single(sol, point)
    phi, _, _ = sol.basis.evaluate(point)
    return _out(single, np.hypot(phi @ sol.params.nu, phi @ sol.params.mu))


@dataclass(frozen=True)
class ResidualReport:
    """Normalized residuals of the two QSHJE relations at a batch of points.

    Attributes
    ----------
    points : ndarray, shape (n, d)
    residual_qhje : ndarray
        ``(1/2m)|grad S0|**2 - (hbar**2/2m) lap R / R + V - E`` divided by ``scale``.
    residual_continuity : ndarray
        ``div(R**2 grad S0)`` divided by ``scale_continuity``.
    scale : ndarray
        ``|E| + sum_a max|V_a|`` plus the local magnitudes of the kinetic
        and quantum-potential terms.
    scale_continuity : ndarray
        Sum of the magnitudes of the terms making up the divergence.
    excluded : ndarray of bool
        Points where ``grad U`` is degenerate; their residuals are NaN.
    """

    points: np.ndarray
    residual_qhje: np.ndarray
    residual_continuity: np.ndarray
    scale: np.ndarray
    scale_continuity: np.ndarray
    excluded: np.ndarray

    def max_qhje(self):
        r = self.residual_qhje[~self.excluded]
        return float(np.max(np.abs(r))) if r.size else 0.0

    def max_continuity(self):
        r = self.residual_continuity[~self.excluded]
        return float(np.max(np.abs(r))) if r.size else 0.0

    def summary(self):
        keep = ~self.excluded
        return {
            "n_points": int(self.points.shape[0]),
            "n_excluded": int(np.count_nonzero(self.excluded)),
            "qhje": {"max": self.max_qhje(),
                     "mean": float(np.mean(np.abs(self.residual_qhje[keep]))) if keep.any() else 0.0},
            "continuity": {"max": self.max_continuity(),
                           "mean": float(np.mean(np.abs(self.residual_continuity[keep]))) if keep.any() else 0.0},
        }


def residual_qshje(sol, point):
    """Residuals of the QSHJE system at one point or a batch.

    Points where ``R = 0`` raise :class:`ExcludedPoint`. Points where
    ``grad U`` (``U = psi1/psi2``) is degenerate, i.e.
    ``|psi2 grad psi1 - psi1 grad psi2|`` below ``1e-12`` of the summed
    magnitudes of its terms (see :func:`phase_numerator`),
    are flagged in ``excluded`` instead of being evaluated.
    """
    pts = sol.basis._points(point)
    psi1, psi2, g1, g2, l1, l2 = sol.fields(pts)
    p = psi1 * psi1 + psi2 * psi2
    if np.any(p == 0.0):
        k = int(np.flatnonzero(p == 0.0)[0])
        raise ExcludedPoint("R vanishes at the point", detail={"point": pts[k].tolist()})
    hbar, m = sol.constants.hbar, sol.constants.mass
    n_vec, n_terms = phase_numerator(sol, pts)
    excluded = np.linalg.norm(n_vec, axis=1) <= DEGENERATE_GRADU_RTOL * n_terms
    if excluded.any():
        log.info("excluded %d of %d points with degenerate grad U, first at %s",
                 int(excluded.sum()), excluded.size, pts[np.argmax(excluded)].tolist())

    gs = hbar * n_vec / p[:, None]
    dp = 2.0 * (psi1[:, None] * g1 + psi2[:, None] * g2)
    grad_sq = np.sum(g1 * g1, axis=1) + np.sum(g2 * g2, axis=1)
    q1, q2, q3 = grad_sq / p, (psi1 * l1 + psi2 * l2) / p, 0.25 * np.sum(dp * dp, axis=1) / (p * p)
    kinetic = np.sum(gs * gs, axis=1) / (2.0 * m)
    c = hbar**2 / (2.0 * m)
    v = sol.basis.potential(pts)
    # kinetic and quantum-potential terms both grow like 1/R**2 near nodes of R and
    # cancel there, so their local size joins the fixed energy scale
    scale = sol.energy_scale() + kinetic + c * (q1 + np.abs(q2) + q3)
    res1 = (kinetic - c * (q1 + q2 - q3) + v - sol.energy) / scale

    # div(P grad S0) = grad P . grad S0 + P lap S0, with lap S0 expanded
    t1 = np.sum(dp * gs, axis=1)
    t2a = hbar * psi2 * l1
    t2b = -hbar * psi1 * l2
    t3 = -hbar * np.sum(n_vec * dp, axis=1) / p
    cont_scale = np.abs(t1) + np.abs(t2a) + np.abs(t2b) + np.abs(t3)
    total = t1 + t2a + t2b + t3
    res2 = np.where(cont_scale > 0, total / np.where(cont_scale > 0, cont_scale, 1.0), 0.0)

    res1 = np.where(excluded, np.nan, res1)
    res2 = np.where(excluded, np.nan, res2)
    return ResidualReport(pts, res1, res2, scale, cont_scale, excluded)


def _s0_derivatives_1d(sol, x):
    """``S0', S0'', S0'''`` at 1D points via the Wronskian-like numerator ``N``."""
    if sol.dimension != 1:
        raise InvalidInput("the Schwarzian form applies to one-dimensional solutions")
    pair = sol.basis.spec.axes[0]
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    sol.basis._points(xs)
    v1, d1, v2, d2 = pair.evaluate(xs)
    k = pair.constants.q_factor()
    q = k * (pair.potential(xs) - pair.energy)
    (a, b), (c, e) = sol.params.nu, sol.params.mu
    y1, y1p = a * v1 + b * v2, a * d1 + b * d2
    y2, y2p = c * v1 + e * v2, c * d1 + e * d2
    y1pp, y2pp = q * y1, q * y2

    # N = det(nu, mu) times the pair Wronskian, which is constant, so only P varies
    n0 = (a * e - b * c) * (d1 * v2 - v1 * d2)
    p0 = y1 * y1 + y2 * y2
    r1 = 2.0 * (y1 * y1p + y2 * y2p) / p0
    r2 = 2.0 * (y1p * y1p + y2p * y2p + y1 * y1pp + y2 * y2pp) / p0
    s1 = sol.constants.hbar * n0 / p0
    s2 = -s1 * r1
    s3 = s1 * (2.0 * r1 * r1 - r2)
    return xs, s1, s2, s3


def residual_1d_schwarzian(sol, x, normalize=False):
    """LHS minus RHS of the third-order 1D form of the QSHJE.

    ``(1/2m) S0'**2 + V - E - (hbar**2/4m) [3/2 (S0''/S0')**2 - S0'''/S0']``,
    in energy units, or divided by :meth:`QshjeSolution.energy_scale` when
    ``normalize`` is set.
    """
    single = np.ndim(x) == 0
    xs, s1, s2, s3 = _s0_derivatives_1d(sol, x)
    pair = sol.basis.spec.axes[0]
    m, hbar = sol.constants.mass, sol.constants.hbar
    lhs = s1 * s1 / (2.0 * m) + pair.potential(xs) - pair.energy
    rhs = hbar**2 / (4.0 * m) * (1.5 * (s2 / s1) ** 2 - s3 / s1)
    res = lhs - rhs
    if normalize:
        res = res / sol.energy_scale()
    return _out(single, res)


def extract_s0_from_wavefunction(re_psi, im_psi, modulus_alpha, modulus_beta, a=0.0, b=0.0,
                                 point=None, hbar=1.0):
    """Recover ``S0`` from a complex wave function written in the two-exponential form.

    Returns the principal value of
    ``hbar*arctan((|a|+|b|)/(|a|-|b|) * Im[w]/Re[w]) + hbar*(b - a)/2`` with
    ``w = exp(-i(a+b)/2) Psi``. The value agrees with :func:`eval_s0`
    modulo ``hbar*pi``.

    ``re_psi`` and ``im_psi`` may be numbers/arrays or callables of ``point``.

    Raises
    ------
    RealWavefunction
        ``|alpha| = |beta|``.
    BranchPoint
        ``Re[w] = 0``.
    """
    if callable(re_psi):
        re_psi = re_psi(point)
    if callable(im_psi):
        im_psi = im_psi(point)
    ma, mb = float(modulus_alpha), float(modulus_beta)
    if ma < 0 or mb < 0:
        raise InvalidInput("moduli must be non-negative")
    if ma == mb:
        raise RealWavefunction("|alpha| = |beta|: S0 cannot be read off the wave function",
                               detail={"modulus": ma})
    w = np.exp(-0.5j * (a + b)) * (np.asarray(re_psi) + 1j * np.asarray(im_psi))
    if np.any(w.real == 0.0):
        raise BranchPoint("phase-aligned real part of the wave function vanishes",
                          detail={"point": None if point is None else np.asarray(point).tolist()})
    val = hbar * (np.arctan((ma + mb) / (ma - mb) * w.imag / w.real) + 0.5 * (b - a))
    return float(val) if np.ndim(val) == 0 else val

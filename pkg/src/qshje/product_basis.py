"""Product solutions of separable problems and their linear combinations.

In ``d`` dimensions the ``2**d`` products of axis solutions are ordered with
the first axis slowest: in 3D ``phi_1 = X1 Y1 Z1, phi_2 = X1 Y1 Z2, ...,
phi_8 = X2 Y2 Z2``. The 0-based index of a product is therefore the binary
number formed by its axis selectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .basis1d import BasisPair
from .errors import InvalidInput
from .potentials import PhysicalConstants

PROPORTIONALITY_RTOL = 1e-10
ENERGY_RTOL = 1e-12

# 1-based index pairs (i, l), (j, m) with phi_i phi_l = phi_j phi_m
RELATIONS = {
    2: (((1, 4), (2, 3)),),
    3: (
        ((1, 4), (2, 3)),
        ((1, 6), (2, 5)),
        ((1, 7), (3, 5)),
        ((2, 8), (4, 6)),
        ((3, 8), (4, 7)),
        ((5, 8), (6, 7)),
        ((1, 8), (2, 7)),
        ((2, 7), (3, 6)),
        ((3, 6), (4, 5)),
    ),
}


def selectors(dimension):
    """``(2**d, d)`` array of axis selectors (0 or 1) in product order."""
    return np.array(list(itertools.product((0, 1), repeat=dimension)), dtype=np.int_)


@dataclass(frozen=True)
class SeparableSpec:
    """Per-axis basis pairs of a separable problem.

    Parameters
    ----------
    axes : sequence of BasisPair
        One pair per Cartesian axis (1 to 3 of them).
    constants : PhysicalConstants
    total_energy : float, optional
        Checked against the sum of axis energies; defaults to that sum.
    """

    axes: tuple
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    total_energy: float = None

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 3:
            raise InvalidInput("dimension must be 1, 2 or 3")
        for a, pair in enumerate(axes):
            if not isinstance(pair, BasisPair):
                raise InvalidInput(f"axis {a} is not a BasisPair")
            if pair.constants != self.constants:
                raise InvalidInput(f"axis {a} was built with different physical constants")
        object.__setattr__(self, "axes", axes)
        energy_sum = float(sum(p.energy for p in axes))
        if self.total_energy is None:
            object.__setattr__(self, "total_energy", energy_sum)
        else:
            total = float(self.total_energy)
            scale = max(abs(total), max(abs(p.energy) for p in axes), np.finfo(float).tiny)
            if abs(total - energy_sum) > ENERGY_RTOL * scale:
                raise InvalidInput(
                    f"axis energies sum to {energy_sum!r}, not the total energy {total!r}"
                )
            object.__setattr__(self, "total_energy", total)

    @property
    def dimension(self):
        return len(self.axes)


@dataclass(frozen=True)
class ActionParams:
    """Coefficients ``(nu, mu)`` of ``psi1 = sum nu_i phi_i``, ``psi2 = sum mu_i phi_i`` and the constant ``l``."""

    nu: np.ndarray
    mu: np.ndarray
    l: float = 0.0

    def __post_init__(self):
        nu = np.array(self.nu, dtype=float).reshape(-1)
        mu = np.array(self.mu, dtype=float).reshape(-1)
        if nu.shape != mu.shape or nu.size not in (2, 4, 8):
            raise InvalidInput("nu and mu must both have length 2, 4 or 8")
        if not (np.all(np.isfinite(nu)) and np.all(np.isfinite(mu)) and np.isfinite(self.l)):
            raise InvalidInput("action parameters must be finite")
        sv = np.linalg.svd(np.vstack([nu, mu]), compute_uv=False)
        if sv[0] == 0.0 or sv[1] <= PROPORTIONALITY_RTOL * sv[0]:
            raise InvalidInput("nu and mu are proportional, so psi1 and psi2 would be dependent")
        nu.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "l", float(self.l))

    @property
    def dimension(self):
        return int(np.log2(self.nu.size))

    def is_normalized(self, nu_anchor=0, mu_anchor=-1, rtol=1e-12):
        return (abs(self.nu[nu_anchor] - 1.0) <= rtol) and (abs(self.mu[mu_anchor] - 1.0) <= rtol)

    def normalized(self, nu_anchor=0, mu_anchor=-1):
        """Equivalent parameters with ``nu[nu_anchor] = mu[mu_anchor] = 1``.

        Rotating ``(psi1, psi2)`` by an angle ``t`` shifts ``S0`` by
        ``-hbar*t`` and a common rescaling leaves it unchanged, so the result
        has the same ``S0`` (``l`` absorbs the rotation, modulo ``pi``).
        """
        p, q = nu_anchor, mu_anchor
        t = np.arctan2(self.nu[p] - self.mu[q], self.mu[p] + self.nu[q])
        if self.nu[p] - self.mu[q] == 0.0 and self.mu[p] + self.nu[q] == 0.0:
            # any angle balances the anchors; pick one that keeps them nonzero
            t = -np.arctan2(self.mu[p], self.nu[p])
        c, s = np.cos(t), np.sin(t)
        nu = c * self.nu - s * self.mu
        mu = s * self.nu + c * self.mu
        if nu[p] < 0:
            nu, mu, t = -nu, -mu, t + np.pi
        if nu[p] == 0.0:
            raise InvalidInput("the anchor entries cannot be normalized for these parameters")
        scale = nu[p]
        nu, mu = nu / scale, mu / scale
        nu[p], mu[q] = 1.0, 1.0
        return ActionParams(nu, mu, self.l + t)

    def to_dict(self):
        return {"nu": self.nu.tolist(), "mu": self.mu.tolist(), "l": self.l}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["nu"], data["mu"], data.get("l", 0.0))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed action parameters: {exc}") from None


@dataclass(frozen=True)
class AxisValues:
    """Axis factors at a batch of points; arrays have shape ``(n, d, 2)``."""

    value: np.ndarray
    first: np.ndarray
    second: np.ndarray


@dataclass(frozen=True)
class ProductBasis:
    """The ``2**d`` products ``phi_i`` of a separable problem."""

    spec: SeparableSpec
    selectors: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        sel = selectors(self.spec.dimension)
        sel.setflags(write=False)
        object.__setattr__(self, "selectors", sel)

    @property
    def dimension(self):
        return self.spec.dimension

    @property
    def size(self):
        return 2**self.dimension

    @property
    def constants(self):
        return self.spec.constants

    @property
    def energy(self):
        return self.spec.total_energy

    @property
    def lower(self):
        return np.array([p.domain[0] for p in self.spec.axes])

    @property
    def upper(self):
        return np.array([p.domain[1] for p in self.spec.axes])

    def labels(self):
        """Factor names such as ``"X1Y2"`` in product order."""
        names = "XYZ"
        return ["".join(f"{names[a]}{s + 1}" for a, s in enumerate(row)) for row in self.selectors]

    def _points(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            # a list of x values in 1D, a single point otherwise
            pts = pts.reshape(-1, 1) if self.dimension == 1 else pts.reshape(1, -1)
        if pts.shape[-1] != self.dimension:
            raise InvalidInput(f"points must have {self.dimension} coordinates")
        lo, hi = self.lower, self.upper
        if np.any(~np.isfinite(pts)) or np.any((pts < lo) | (pts > hi)):
            raise InvalidInput("point outside the domain box")
        return pts

    def axis_values(self, points):
        """Values, first and second derivatives of every axis factor."""
        pts = self._points(points)
        n, d = pts.shape
        val = np.empty((n, d, 2))
        der = np.empty((n, d, 2))
        sec = np.empty((n, d, 2))
        for a, pair in enumerate(self.spec.axes):
            x = pts[:, a]
            v1, d1, v2, d2 = pair.evaluate(x)
            q = pair.q(x)
            val[:, a, 0], val[:, a, 1] = v1, v2
            der[:, a, 0], der[:, a, 1] = d1, d2
            sec[:, a, 0], sec[:, a, 1] = q * v1, q * v2
        return AxisValues(val, der, sec)

    def evaluate(self, points):
        """Return ``(phi, grad_phi, lap_phi)`` with shapes ``(n, 2**d)``, ``(n, 2**d, d)``, ``(n, 2**d)``."""
        av = self.axis_values(points)
        n, d, _ = av.value.shape
        cols = np.arange(d)
        fv = av.value[:, cols, self.selectors]  # (n, 2**d, d) after fancy indexing
        fd = av.first[:, cols, self.selectors]
        fs = av.second[:, cols, self.selectors]
        phi = np.prod(fv, axis=-1)
        grad = np.empty(fv.shape)
        lap = np.zeros(phi.shape)
        for a in range(d):
            others = np.prod(np.delete(fv, a, axis=-1), axis=-1)
            grad[..., a] = fd[..., a] * others
            lap += fs[..., a] * others
        return phi, grad, lap

    def potential(self, points):
        pts = self._points(points)
        return sum(pair.potential(pts[:, a]) for a, pair in enumerate(self.spec.axes))

    def max_potential(self):
        """Sum over axes of ``max |V_a|`` on the axis grids."""
        return float(sum(np.max(np.abs(p.potential(p.grid))) for p in self.spec.axes))

    def schrodinger_residual(self, points):
        """``|-(hbar**2/2m) lap phi + (V - E) phi|`` normalized by ``(|E| + max|V|) max|phi|``."""
        c = self.constants.hbar**2 / (2.0 * self.constants.mass)
        phi, _, lap = self.evaluate(points)
        v = self.potential(points)[:, None]
        res = -c * lap + (v - self.energy) * phi
        scale = (abs(self.energy) + self.max_potential()) or 1.0
        amp = np.max(np.abs(phi), axis=1, keepdims=True)
        amp[amp == 0.0] = 1.0
        return np.abs(res) / (scale * amp)


def build_products(spec):
    """Product basis of a separable problem, in the standard ordering."""
    if not isinstance(spec, SeparableSpec):
        raise InvalidInput("build_products expects a SeparableSpec")
    return ProductBasis(spec)


@dataclass(frozen=True)
class RelationReport:
    """Outcome of :func:`check_product_relations`.

    ``deviations[k, r]`` is ``|phi_i phi_l - phi_j phi_m|`` for relation ``r``
    at point ``k`` divided by the largest ``|phi_i phi_l|`` at that point.
    """

    relations: tuple
    deviations: np.ndarray
    max_deviation: float
    worst_point: np.ndarray
    worst_relation: tuple
    tolerance: float

    @property
    def ok(self):
        return self.max_deviation < self.tolerance


def check_product_relations(basis, sample_points, tol=1e-12):
    """Evaluate the bilinear identities among products at the given points."""
    if basis.dimension < 2:
        raise InvalidInput("product relations exist only in two or three dimensions")
    pts = basis._points(sample_points)
    phi, _, _ = basis.evaluate(pts)
    rel = RELATIONS[basis.dimension]
    outer = np.abs(phi[:, :, None] * phi[:, None, :])
    scale = outer.reshape(len(pts), -1).max(axis=1)
    scale[scale == 0.0] = 1.0
    dev = np.empty((len(pts), len(rel)))
    for r, ((i, l), (j, m)) in enumerate(rel):
        dev[:, r] = np.abs(phi[:, i - 1] * phi[:, l - 1] - phi[:, j - 1] * phi[:, m - 1]) / scale
    k, r = np.unravel_index(int(np.argmax(dev)), dev.shape)
    return RelationReport(rel, dev, float(dev[k, r]), pts[k].copy(), rel[r], tol)


def combine(basis, params, point):
    """``(psi1, psi2, grad psi1, grad psi2)`` for ``psi1 = sum nu phi``, ``psi2 = sum mu phi``.

    ``point`` may be one point or an ``(n, d)`` batch; outputs are batched
    the same way as :meth:`ProductBasis.evaluate`.
    """
    if params.nu.size != basis.size:
        raise InvalidInput(f"parameters have {params.nu.size} entries, basis has {basis.size}")
    phi, grad, _ = basis.evaluate(point)
    psi1 = phi @ params.nu
    psi2 = phi @ params.mu
    g1 = np.einsum("nid,i->nd", grad, params.nu)
    g2 = np.einsum("nid,i->nd", grad, params.mu)
    return psi1, psi2, g1, g2

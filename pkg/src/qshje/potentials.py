"""One-dimensional potentials and physical constants."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ExcludedPoint, InvalidInput

KINDS = ("free", "constant-step", "harmonic", "quartic", "tabulated", "user-expression")


@dataclass(frozen=True)
class PhysicalConstants:
    """Reduced Planck constant and particle mass, both strictly positive."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0.0:
                raise InvalidInput(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, value)

    def q_factor(self):
        """Return ``2m/hbar**2``, the factor turning ``V - E`` into ``psi''/psi``."""
        return 2.0 * self.mass / self.hbar**2


def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative at 0.

    ``offsets`` are the stencil positions relative to the evaluation point.
    """
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    powers = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(powers, rhs)


@dataclass(frozen=True)
class Potential1D:
    """A potential on a closed interval.

    Use the named constructors (:meth:`free`, :meth:`harmonic`, ...) rather
    than building instances directly. Instances are callable and vectorized.

    Attributes
    ----------
    kind : str
        One of ``KINDS``.
    params : mapping
        Kind-specific parameters (see the constructors).
    domain : tuple of float
        ``(x_min, x_max)`` with ``x_min < x_max``.
    """

    kind: str
    params: Mapping[str, Any]
    domain: tuple[float, float]
    _value: Callable = field(repr=False, compare=False, default=None)
    _deriv: Callable = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown potential kind {self.kind!r}; expected one of {KINDS}")
        lo, hi = (float(v) for v in self.domain)
        if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
            raise InvalidInput(f"domain must satisfy x_min < x_max, got {self.domain!r}")
        object.__setattr__(self, "domain", (lo, hi))
        if self._value is None:
            value, deriv = _build_callables(self.kind, dict(self.params))
            object.__setattr__(self, "_value", value)
            object.__setattr__(self, "_deriv", deriv)

    # -- constructors -------------------------------------------------
    @classmethod
    def free(cls, domain):
        return cls("free", {}, tuple(domain))

    @classmethod
    def constant(cls, v0, domain, x_step=None, v_left=0.0):
        """Constant ``v0``; with ``x_step`` set, ``v_left`` applies for ``x < x_step``."""
        params = {"v0": float(v0), "v_left": float(v_left)}
        if x_step is not None:
            params["x_step"] = float(x_step)
        return cls("constant-step", params, tuple(domain))

    @classmethod
    def harmonic(cls, stiffness, domain, center=0.0):
        """``V = stiffness * (x - center)**2 / 2``."""
        return cls("harmonic", {"stiffness": float(stiffness), "center": float(center)}, tuple(domain))

    @classmethod
    def quartic(cls, coupling, domain, center=0.0):
        """``V = coupling * (x - center)**4``."""
        return cls("quartic", {"coupling": float(coupling), "center": float(center)}, tuple(domain))

    @classmethod
    def tabulated(cls, xs, vs, domain=None):
        xs = np.asarray(xs, dtype=float)
        vs = np.asarray(vs, dtype=float)
        if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 6:
            raise InvalidInput("tabulated potential needs two equal-length columns with at least 6 rows")
        if not np.all(np.isfinite(vs)) or not np.all(np.isfinite(xs)):
            raise InvalidInput("tabulated potential contains non-finite entries")
        if np.any(np.diff(xs) <= 0):
            raise InvalidInput("tabulated x values must be strictly increasing")
        if domain is None:
            domain = (xs[0], xs[-1])
        if domain[0] < xs[0] or domain[1] > xs[-1]:
            raise InvalidInput("domain extends beyond the tabulated range")
        return cls("tabulated", {"x": tuple(xs), "v": tuple(vs)}, tuple(domain))

    @classmethod
    def from_csv(cls, path, domain=None):
        """Read a two-column ``x, V`` table; a non-numeric first row is a header."""
        rows = []
        with open(Path(path), newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise InvalidInput(f"malformed row in {path}: {row!r}") from None
        if not rows:
            raise InvalidInput(f"no data rows in {path}")
        data = np.array(rows)
        return cls.tabulated(data[:, 0], data[:, 1], domain)

    @classmethod
    def expression(cls, expr, domain, **params):
        """A potential given as a sympy-parsable expression in ``x``."""
        return cls("user-expression", {"expression": str(expr), **params}, tuple(domain))

    # -- evaluation ---------------------------------------------------
    def __call__(self, x):
        return self._value(np.asarray(x, dtype=float))

    def derivative(self, x):
        """First derivative ``V'``.

        Raises
        ------
        ExcludedPoint
            For tabulated potentials within two table nodes of either end,
            where the five-point stencil is unavailable.
        """
        return self._deriv(np.asarray(x, dtype=float))

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= self.domain[0]) & (x <= self.domain[1])

    @property
    def length(self):
        return self.domain[1] - self.domain[0]

    def to_dict(self):
        if self.kind == "tabulated":
            return {"kind": self.kind, "domain": list(self.domain), "n_rows": len(self.params["x"])}
        return {"kind": self.kind, "domain": list(self.domain), **dict(self.params)}


def _build_callables(kind, p):
    if kind == "free":
        return (lambda x: np.zeros_like(x)), (lambda x: np.zeros_like(x))
    if kind == "constant-step":
        v0, v_left = float(p["v0"]), float(p.get("v_left", 0.0))
        x_step = p.get("x_step")
        if x_step is None:
            return (lambda x: np.full_like(x, v0)), (lambda x: np.zeros_like(x))
        x_step = float(x_step)
        return (lambda x: np.where(x < x_step, v_left, v0)), (lambda x: np.zeros_like(x))
    if kind == "harmonic":
        k, c = float(p["stiffness"]), float(p.get("center", 0.0))
        return (lambda x: 0.5 * k * (x - c) ** 2), (lambda x: k * (x - c))
    if kind == "quartic":
        lam, c = float(p["coupling"]), float(p.get("center", 0.0))
        return (lambda x: lam * (x - c) ** 4), (lambda x: 4.0 * lam * (x - c) ** 3)
    if kind == "tabulated":
        return _tabulated_callables(np.asarray(p["x"]), np.asarray(p["v"]))
    if kind == "user-expression":
        return _expression_callables(p)
    raise InvalidInput(f"unknown potential kind {kind!r}")


def _tabulated_callables(xs, vs):
    spline = CubicSpline(xs, vs)
    # V' from five-point differences at interior table nodes.
    dv = np.empty(xs.size - 4)
    for j in range(2, xs.size - 2):
        w = fd_weights(xs[j - 2 : j + 3] - xs[j], 1)
        dv[j - 2] = w @ vs[j - 2 : j + 3]
    inner = xs[2:-2]
    if inner.size >= 2:
        dspline = CubicSpline(inner, dv) if inner.size >= 4 else None
    else:
        dspline = None

    def value(x):
        return spline(x)

    def deriv(x):
        if np.any((x < inner[0]) | (x > inner[-1])):
            raise ExcludedPoint(
                "V' of a tabulated potential is unavailable within two nodes of the table ends",
                detail={"valid": (float(inner[0]), float(inner[-1]))},
            )
        if dspline is None:
            return np.interp(x, inner, dv)
        return dspline(x)

    return value, deriv


def _expression_callables(p):
    import sympy

    xsym = sympy.Symbol("x", real=True)
    names = {k: v for k, v in p.items() if k != "expression"}
    local = {"x": xsym}
    try:
        expr = sympy.sympify(p["expression"], locals=local)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise InvalidInput(f"cannot parse potential expression {p['expression']!r}: {exc}") from None
    expr = expr.subs({sympy.Symbol(k): v for k, v in names.items()})
    expr = expr.subs(sympy.Symbol("x"), xsym)
    extra = expr.free_symbols - {xsym}
    if extra:
        raise InvalidInput(f"unbound symbols in potential expression: {sorted(map(str, extra))}")
    f = sympy.lambdify(xsym, expr, "numpy")
    df = sympy.lambdify(xsym, sympy.diff(expr, xsym), "numpy")

    def value(x):
        return np.broadcast_to(np.asarray(f(x), dtype=float), np.shape(x)).copy()

    def deriv(x):
        return np.broadcast_to(np.asarray(df(x), dtype=float), np.shape(x)).copy()

    return value, deriv

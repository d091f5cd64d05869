"""Wave-function coefficients versus reduced-action parameters.

Writing ``Psi = sum c_i phi_i`` in the two-exponential form with moduli
``|alpha|, |beta|`` (global phase removed) gives

    c_i = (|alpha| + |beta|) mu_i + i (|alpha| - |beta|) nu_i

for parameters normalized by ``nu[p] = mu[q] = 1``. When ``|alpha| != |beta|``
the map is invertible. When ``|alpha| = |beta|`` the wave function is real up
to a phase, every ``nu_i`` drops out, and the coefficients only fix ``mu``:
distinct ``nu`` give distinct ``grad S0`` (microstates) for one ``Psi``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NotRepresentable
from .product_basis import ActionParams

log = logging.getLogger(__name__)

REAL_TOL = 1e-9
COMPLEX_UNIQUE = "complex-unique"
REAL_FAMILY = "real-family"


@dataclass(frozen=True)
class CoefficientVector:
    """Complex coefficients of ``Psi`` in the product basis."""

    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=complex).reshape(-1)
        if c.size not in (2, 4, 8):
            raise InvalidInput("coefficient vector must have length 2, 4 or 8")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("coefficients must be finite")
        if not np.any(c != 0):
            raise InvalidInput("coefficient vector is zero")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_pairs(cls, pairs):
        """Build from ``[[re, im], ...]``."""
        arr = np.asarray(pairs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidInput("coefficients must be given as [[re, im], ...]")
        return cls(arr[:, 0] + 1j * arr[:, 1])

    def to_pairs(self):
        return [[float(z.real), float(z.imag)] for z in self.c]

    @property
    def size(self):
        return self.c.size


def _vec(c):
    return c if isinstance(c, CoefficientVector) else CoefficientVector(c)


def compose_coefficients(params, modulus_alpha, modulus_beta, nu_anchor=0, mu_anchor=-1):
    """Coefficients ``c = (|alpha|+|beta|) mu + i (|alpha|-|beta|) nu``."""
    a, b = float(modulus_alpha), float(modulus_beta)
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise InvalidInput("moduli must be non-negative and not both zero")
    if not params.is_normalized(nu_anchor, mu_anchor):
        raise InvalidInput(f"parameters must satisfy nu[{nu_anchor}] = mu[{mu_anchor}] = 1")
    return CoefficientVector((a + b) * params.mu + 1j * (a - b) * params.nu)


@dataclass(frozen=True)
class RealCase:
    is_real: bool
    theta: float
    residual: float


def is_real_case(c, tol=REAL_TOL):
    """Whether ``exp(-i theta) c`` is real for some ``theta``.

    ``theta = arg(sum c_i**2) / 2`` maximizes the real part's energy; it is
    reported in ``(-pi/2, pi/2]``. ``residual`` is
    ``|Im(exp(-i theta) c)| / |c|``.
    """
    c = _vec(c).c
    s = np.sum(c * c)
    theta = 0.5 * np.angle(s) if s != 0 else 0.0
    if theta <= -0.5 * np.pi:
        theta += np.pi
    aligned = np.exp(-1j * theta) * c
    residual = float(np.linalg.norm(aligned.imag) / np.linalg.norm(c))
    return RealCase(residual <= tol, float(theta), residual)


@dataclass(frozen=True)
class MicrostateResult:
    """Parameters recovered from coefficients.

    ``nu`` holds NaN where undetermined; ``nu_determined`` marks the rest.
    ``family_dimension`` is 0 in the complex case and ``2**d - 1`` in the
    real case (every ``nu`` except the anchor is free).
    """

    case: str
    modulus_alpha: float
    modulus_beta: float
    mu: np.ndarray
    nu: np.ndarray
    nu_determined: np.ndarray
    family_dimension: int
    theta: float
    nu_anchor: int
    mu_anchor: int
    condition: float

    def params(self):
        if self.case != COMPLEX_UNIQUE:
            raise InvalidInput("a real-family result has no unique parameters; use enumerate_family")
        return ActionParams(self.nu, self.mu)

    def to_dict(self):
        return {
            "case": self.case,
            "modulus_alpha": float(self.modulus_alpha),
            "modulus_beta": float(self.modulus_beta),
            "mu": self.mu.tolist(),
            "nu": [None if not det else float(v) for v, det in zip(self.nu, self.nu_determined)],
            "family_dimension": self.family_dimension,
            "theta": self.theta,
            "nu_anchor": self.nu_anchor,
            "mu_anchor": self.mu_anchor,
            "condition": float(self.condition),
        }


def _anchor_order(n, nu_anchor, mu_anchor):
    first = (nu_anchor % n, mu_anchor % n)
    yield first
    for pair in itertools.permutations(range(n), 2):
        if pair != first:
            yield pair


def identify(c, tol=REAL_TOL, nu_anchor=0, mu_anchor=-1):
    """Recover ``(|alpha|, |beta|, mu, nu)`` from coefficients.

    Anchors that make the recovery impossible (a zero coefficient where the
    normalization needs a nonzero one) are replaced by the next workable
    pair; the anchors used are reported.

    Raises
    ------
    NotRepresentable
        No anchor pair gives a decomposition of the normalized form.
    """
    cv = _vec(c)
    c = cv.c
    n = c.size
    norm = float(np.linalg.norm(c))
    real = is_real_case(cv, tol)
    if real.is_real:
        aligned = (np.exp(-1j * real.theta) * c).real
        for _, q in _anchor_order(n, nu_anchor, mu_anchor):
            if abs(aligned[q]) <= tol * norm:
                continue
            sign = 1.0 if aligned[q] > 0 else -1.0
            x = sign * aligned
            theta = real.theta + (0.0 if sign > 0 else np.pi)
            theta = float(np.angle(np.exp(1j * theta)))
            nu = np.full(n, np.nan)
            p = nu_anchor % n if nu_anchor % n != q else (q + 1) % n
            nu[p] = 1.0
            det = np.zeros(n, dtype=bool)
            det[p] = True
            return MicrostateResult(REAL_FAMILY, 0.5 * x[q], 0.5 * x[q], x / x[q], nu, det,
                                    n - 1, theta, p, q, 1.0)
        raise NotRepresentable("real coefficients with no usable mu anchor", detail={"c": cv.to_pairs()})

    for p, q in _anchor_order(n, nu_anchor, mu_anchor):
        d = c[p].imag
        s = c[q].real
        if abs(d) <= tol * norm or s <= 0 or s < abs(d) * (1 - 1e-15):
            continue
        a, b = 0.5 * (s + d), max(0.5 * (s - d), 0.0)
        mu = c.real / s
        nu = c.imag / d
        mu[q], nu[p] = 1.0, 1.0
        return MicrostateResult(COMPLEX_UNIQUE, float(a), float(b), mu, nu, np.ones(n, dtype=bool),
                                0, 0.0, p, q, norm / abs(d))
    raise NotRepresentable(
        "coefficients are not of the form (|a|+|b|) mu + i(|a|-|b|) nu for any anchors",
        detail={"c": cv.to_pairs()},
    )


def coefficients_match(c1, c2):
    """``min over complex lam of |c2 - lam c1| / |c2|``."""
    a, b = _vec(c1).c, _vec(c2).c
    lam = np.vdot(a, b) / np.vdot(a, a)
    return float(np.linalg.norm(b - lam * a) / np.linalg.norm(b))


def enumerate_family(result, nu_samples, notes=None):
    """Family members sharing one real wave function.

    Each sample is either the ``n - 1`` free ``nu`` entries (anchor
    excluded) or a full length-``n`` vector whose anchor entry is 1.
    Samples making ``nu`` proportional to ``mu`` are skipped; a message is
    appended to ``notes`` when given.
    """
    if result.case != REAL_FAMILY:
        raise InvalidInput("enumerate_family needs a real-family result")
    n = result.mu.size
    p = result.nu_anchor
    members = []
    for idx, sample in enumerate(nu_samples):
        s = np.atleast_1d(np.asarray(sample, dtype=float))
        if s.size == n - 1:
            nu = np.insert(s, p, 1.0)
        elif s.size == n:
            if s[p] != 1.0:
                raise InvalidInput(f"sample {idx}: full nu vectors must have nu[{p}] = 1")
            nu = s.copy()
        else:
            raise InvalidInput(f"sample {idx}: expected {n - 1} or {n} entries, got {s.size}")
        try:
            members.append(ActionParams(nu, result.mu))
        except InvalidInput:
            msg = f"sample {idx} skipped: nu proportional to mu"
            log.info(msg)
            if notes is not None:
                notes.append(msg)
    return members


@dataclass(frozen=True)
class BohmReport:
    compatible: bool
    im_c_anchor: float
    re_c_anchor: float
    case: str
    detail: str

    def to_dict(self):
        return {"compatible": self.compatible, "im_c_first": self.im_c_anchor,
                "re_c_last": self.re_c_anchor, "case": self.case, "detail": self.detail}


def bohm_diagnostic(c, tol=1e-12, nu_anchor=0, mu_anchor=-1):
    """Whether ``c`` can come from ``alpha = 1, beta = 0``.

    That choice forces ``Im c[nu_anchor] = 1`` and ``Re c[mu_anchor] = 1``.
    """
    cv = _vec(c)
    real = is_real_case(cv, REAL_TOL)
    x = cv.c
    case = REAL_FAMILY if real.is_real else COMPLEX_UNIQUE
    im1, re2 = float(x[nu_anchor].imag), float(x[mu_anchor].real)
    ok = abs(im1 - 1.0) <= tol and abs(re2 - 1.0) <= tol and not real.is_real
    if ok:
        detail = "Im c[first] = 1 and Re c[last] = 1"
    elif real.is_real:
        detail = "real wave function: |alpha| = |beta| cannot equal (1, 0)"
    else:
        detail = f"needs Im c[first] = 1 and Re c[last] = 1, found {im1!r} and {re2!r}"
    return BohmReport(bool(ok), im1, re2, case, detail)

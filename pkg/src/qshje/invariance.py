"""Invariance of the conjugate momentum under linear changes of product basis.

A transform ``theta_i = sum_j alpha_ij phi_j`` maps the reduced action with
parameters ``(nu, mu)`` over ``phi`` to one with ``(nu~, mu~)`` over
``theta``. Requiring ``S0 = S0~ + hbar*l0`` gives, with
``k = tan(l0 + l~ - l)``, ``A = alpha^T (k nu~ - mu~)`` and
``B = alpha^T (k mu~ + nu~)``, the bilinear condition
``sum_il (A_l nu_i + B_l mu_i) phi_i phi_l = 0``. Collecting the independent
product monomials leaves the diagonal equations ``A_i nu_i + B_i mu_i = 0``
and the ratio equations ``nu_i B_l = nu_l B_i``: ``2n - 1`` independent rows
for ``n = 2**d`` unknown pairs.

The general solution is ``nu~ = s beta^T (nu - k mu)``,
``mu~ = s beta^T (k nu + mu)`` with ``beta = alpha^-1``; it serves as an
independent cross-check of the numerical solve.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTransform, InvalidInput, NumericalFailure
from .product_basis import ActionParams, selectors

RANK_RTOL = 1e-10
SYSTEM_RTOL = 1e-10
K_SAMPLES = (0.0, 1.0, -1.0, 2.0, -0.5, 3.0, -2.5)


@dataclass(frozen=True)
class TransformMatrix:
    """An invertible real ``2**d x 2**d`` matrix ``alpha``."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4, 8):
            raise InvalidInput("transform must be a square matrix of size 2, 4 or 8")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("transform entries must be finite")
        scale = float(np.max(np.abs(a)))
        # scale first so tiny or huge entries do not under/overflow the determinant
        det = np.linalg.det(a / scale) if scale > 0.0 else 0.0
        if abs(det) <= 1e-12:
            raise InvalidInput(f"transform is singular (scaled det = {det:.3e})")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def size(self):
        return self.entries.shape[0]

    @property
    def dimension(self):
        return int(np.log2(self.size))

    @classmethod
    def identity(cls, dimension):
        return cls(np.eye(2**dimension))

    @classmethod
    def random(cls, dimension, rng, max_condition=1e3):
        """Gaussian random transform with bounded condition number."""
        n = 2**dimension
        while True:
            a = rng.normal(size=(n, n))
            if np.linalg.cond(a) < max_condition:
                return cls(a)

    def compose(self, other):
        """Transform applying ``self`` first and then ``other``."""
        return TransformMatrix(other.entries @ self.entries)


def invert_transform(t):
    """``beta`` with ``beta @ alpha = I``.

    Raises
    ------
    NumericalFailure
        The product deviates from the identity by more than ``1e-12``.
    """
    a = t.entries
    b = np.linalg.solve(a, np.eye(t.size))
    err = float(np.max(np.abs(b @ a - np.eye(t.size))))
    if err > 1e-12:
        raise NumericalFailure(f"inverse check failed: max |beta alpha - I| = {err:.3e}", value=err)
    return TransformMatrix(b)


def _jacobians(alpha, k):
    """Rows of ``A`` and ``B`` as linear maps of ``x = [nu~, mu~]``."""
    at = alpha.T
    ja = np.hstack([k * at, -at])
    jb = np.hstack([at, k * at])
    return ja, jb


@dataclass(frozen=True)
class InvarianceSystem:
    """Linear system ``matrix @ [nu~, mu~] = 0`` with row labels."""

    matrix: np.ndarray
    labels: tuple

    @property
    def unknowns(self):
        return self.matrix.shape[1]

    def rank(self, rtol=RANK_RTOL):
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.count_nonzero(sv > rtol * sv[0])) if sv[0] > 0 else 0


def build_invariance_system(params, transform, k):
    """Reduced invariance equations for the tilde parameters.

    In 1D these are the three coefficients of ``theta_1**2``,
    ``theta_2**2`` and ``theta_1 theta_2`` written through ``beta``. In 2D
    and 3D they are the ``n`` diagonal equations followed by ``n - 1`` ratio
    equations ``nu_r B_i - nu_i B_r = 0`` against the index ``r`` of the
    largest ``|nu|``.
    """
    n = params.nu.size
    if transform.size != n:
        raise InvalidInput("transform size does not match the parameters")
    nu, mu = params.nu, params.mu
    k = float(k)
    if n == 2:
        beta = np.linalg.solve(transform.entries, np.eye(2))
        p = (k * mu - nu) @ beta  # coefficient of mu~
        q = (k * nu + mu) @ beta  # coefficient of nu~
        m = np.array([
            [q[0], 0.0, p[0], 0.0],
            [0.0, q[1], 0.0, p[1]],
            [q[1], q[0], p[1], p[0]],
        ])
        return InvarianceSystem(m, ("theta1^2", "theta2^2", "theta1*theta2"))
    ja, jb = _jacobians(transform.entries, k)
    rows = [nu[i] * ja[i] + mu[i] * jb[i] for i in range(n)]
    labels = [f"diag {i + 1}" for i in range(n)]
    r = int(np.argmax(np.abs(nu)))
    for i in range(n):
        if i != r:
            rows.append(nu[r] * jb[i] - nu[i] * jb[r])
            labels.append(f"ratio {r + 1},{i + 1}")
    return InvarianceSystem(np.array(rows), tuple(labels))


def monomial_keys(dimension):
    """Group the index pairs ``i <= l`` by the product monomial ``phi_i phi_l``."""
    sel = selectors(dimension)
    groups = {}
    for i, l in itertools.combinations_with_replacement(range(2**dimension), 2):
        key = tuple(tuple(sorted((sel[i, a], sel[l, a]))) for a in range(dimension))
        groups.setdefault(key, []).append((i, l))
    return groups


def build_full_system(params, transform, k):
    """One equation per independent product monomial (3, 9 or 27 rows).

    This is the unreduced system; its rank equals that of the reduced one,
    which is the statement that the remaining relations are identities.
    """
    n = params.nu.size
    d = int(np.log2(n))
    ja, jb = _jacobians(transform.entries, k)
    nu, mu = params.nu, params.mu
    rows, labels = [], []
    for key, pairs in monomial_keys(d).items():
        row = np.zeros(2 * n)
        for i, l in pairs:
            if i == l:
                row += nu[i] * ja[i] + mu[i] * jb[i]
            else:
                row += nu[i] * ja[l] + mu[i] * jb[l] + nu[l] * ja[i] + mu[l] * jb[i]
        rows.append(row)
        labels.append(" ".join(f"phi{i + 1}phi{l + 1}" for i, l in pairs))
    return InvarianceSystem(np.array(rows), tuple(labels))


@dataclass(frozen=True)
class TildeSolve:
    """Tilde parameters and diagnostics of the solve.

    Attributes
    ----------
    tilde_nu, tilde_mu : ndarray
        Normalized so that ``tilde_nu[nu_anchor] = tilde_mu[mu_anchor] = 1``.
    k : float
    rank : int
        Numerical rank of the reduced system at ``k``.
    residual : float
        ``|M x| / (max|M| max|x|)``.
    closed_form_error : float
        Largest deviation from the closed-form solution.
    ratio_spread : float
        Largest normalized ``|nu_i B_l - nu_l B_i|``.
    k_numeric : float
        ``k`` found from null vectors of the system alone, a cross-check on
        ``k``; NaN when the sampled systems were all rank deficient.
    """

    tilde_nu: np.ndarray
    tilde_mu: np.ndarray
    k: float
    rank: int
    residual: float
    closed_form_error: float
    ratio_spread: float
    k_numeric: float
    nu_anchor: int = 0
    mu_anchor: int = -1
    system: InvarianceSystem = field(default=None, repr=False, compare=False)

    def params(self, l=0.0):
        return ActionParams(self.tilde_nu, self.tilde_mu, l)


def closed_form_tilde(params, transform, k, nu_anchor=0):
    """``(nu~, mu~)`` from the closed form, scaled so that ``nu~[nu_anchor] = 1``."""
    beta_t = np.linalg.solve(transform.entries, np.eye(transform.size)).T
    tn = beta_t @ (params.nu - k * params.mu)
    tm = beta_t @ (k * params.nu + params.mu)
    if tn[nu_anchor] == 0.0:
        raise DegenerateTransform("nu~ anchor vanishes for this transform",
                                  detail={"k": float(k)})
    return tn / tn[nu_anchor], tm / tn[nu_anchor]


def k_closed_form(params, transform, nu_anchor=0, mu_anchor=-1):
    """Value of ``k`` giving ``mu~[mu_anchor] = 1`` once ``nu~[nu_anchor] = 1``.

    Returns ``(k, denominator)``.
    """
    n = transform.size
    p, q = nu_anchor % n, mu_anchor % n
    beta_t = np.linalg.solve(transform.entries, np.eye(n)).T
    bn, bm = beta_t @ params.nu, beta_t @ params.mu
    den = bn[q] + bm[p]
    num = bn[p] - bm[q]
    return (num / den if den != 0.0 else np.inf), den


def _null_vector(m):
    _, _, vt = np.linalg.svd(m)
    return vt[-1]


def _k_numeric(params, transform, p, q):
    """Solve ``mu~_q / nu~_p = 1`` for ``k`` from null vectors of the system.

    The ratio is a Mobius function of ``k``; three samples determine it.
    """
    n = transform.size
    rows, used = [], []
    for k in K_SAMPLES:
        system = build_invariance_system(params, transform, k)
        if system.rank() != 2 * n - 1:
            # structured transforms can widen the null space; its direction is then arbitrary
            continue
        z = _null_vector(system.matrix)
        if abs(z[p]) < 1e-8 * np.max(np.abs(z)):
            continue
        h = z[n + q] / z[p]
        rows.append([k, 1.0, -h * k, -h])
        used.append(k)
        if len(rows) == 3:
            break
    if len(rows) < 3:
        raise DegenerateTransform("nu~ anchor vanishes at every sampled k",
                                  detail={"samples": list(K_SAMPLES)})
    a, b, c, d = _null_vector(np.array(rows))
    den = a - c
    scale = abs(a) + abs(b) + abs(c) + abs(d)
    if abs(den) <= 1e-12 * scale:
        raise DegenerateTransform(
            "no k normalizes the mu~ anchor (denominator vanishes)",
            detail={"denominator": float(den), "nu_anchor": p, "mu_anchor": q},
        )
    k = (d - b) / den

    def mismatch(kk):
        z = _null_vector(build_invariance_system(params, transform, kk).matrix)
        return z[n + q] / z[p] - 1.0

    # secant polish: the fitted map inherits the sampling error of its nodes
    k0, f0 = k, mismatch(k)
    k1 = k0 + 1e-6 * (1.0 + abs(k0))
    f1 = mismatch(k1)
    for _ in range(4):
        if f1 == f0 or f0 == 0.0:
            break
        k2 = k1 - f1 * (k1 - k0) / (f1 - f0)
        k0, f0, k1, f1 = k1, f1, k2, mismatch(k2)
        if abs(k1 - k0) <= 1e-15 * (1.0 + abs(k1)):
            break
    return k1 if abs(f1) <= abs(f0) else k0


def solve_tilde(params, transform, nu_anchor=0, mu_anchor=-1, check=True):
    """Tilde parameters that keep every momentum component unchanged.

    ``k`` comes from the anchor condition, which is linear in ``k`` once the
    tilde unknowns are eliminated; the tilde vector is then the normalized
    null vector of the system at that ``k``.

    Parameters
    ----------
    params : ActionParams
        Must satisfy ``nu[nu_anchor] = mu[mu_anchor] = 1``.
    transform : TransformMatrix
    nu_anchor, mu_anchor : int
        Normalization indices (defaults: first ``nu``, last ``mu``).
    check : bool
        Raise when the residual or the closed-form comparison fails.

    Raises
    ------
    InvalidInput
        ``params`` not normalized at the anchors.
    DegenerateTransform
        No ``k`` achieves the ``mu~`` normalization, or the ``nu~`` anchor
        vanishes at the only admissible ``k``.
    NumericalFailure
        The system residual exceeds ``1e-10``.
    """
    n = params.nu.size
    if transform.size != n:
        raise InvalidInput("transform size does not match the parameters")
    p, q = nu_anchor % n, mu_anchor % n
    if not params.is_normalized(p, q):
        raise InvalidInput(
            f"parameters must satisfy nu[{p}] = mu[{q}] = 1; use ActionParams.normalized()"
        )
    # the normalized tilde parameters and k do not depend on the scale of alpha,
    # while the system mixes alpha and beta entries and can under/overflow
    transform = TransformMatrix(transform.entries / np.max(np.abs(transform.entries)))
    k_form, den = k_closed_form(params, transform, p, q)
    beta_t = np.linalg.solve(transform.entries, np.eye(n)).T
    bn, bm = beta_t @ params.nu, beta_t @ params.mu
    den_scale = np.linalg.norm(bn) + np.linalg.norm(bm)
    if abs(den) <= 1e-12 * den_scale and abs(bn[p] - bm[q]) <= 1e-12 * den_scale:
        # the mu~ anchor condition holds for every k; prefer k = 0 (l~ = l) unless
        # it leaves the nu~ anchor at zero
        k = 0.0 if abs(bn[p]) >= abs(bm[p]) else 1.0
    elif abs(den) <= 1e-12 * den_scale:
        raise DegenerateTransform(
            "the k denominator vanishes for this transform",
            detail={"denominator": float(den), "nu_anchor": p, "mu_anchor": q},
        )
    else:
        # the anchor condition is linear in k once the tilde unknowns are eliminated
        k = float(k_form)
    tn_k = bn - k * bm
    if abs(tn_k[p]) <= 1e-12 * np.max(np.abs(tn_k)):
        raise DegenerateTransform("nu~ anchor vanishes at the only admissible k",
                                  detail={"k": k, "nu_anchor": p, "mu_anchor": q})
    try:
        k_num = _k_numeric(params, transform, p, q)
    except (DegenerateTransform, np.linalg.LinAlgError, ZeroDivisionError, FloatingPointError):
        k_num = float("nan")

    system = build_invariance_system(params, transform, k)
    m = system.matrix
    m_scale = np.max(np.abs(m))

    def sys_residual(v):
        return float(np.max(np.abs(m @ v)) / (m_scale * np.max(np.abs(v))))

    x_cf = np.concatenate(closed_form_tilde(params, transform, k, p))
    x_cf[n + q] = 1.0  # equals 1 up to the rounding of k
    x = x_cf
    if system.rank() == 2 * n - 1:
        fixed = [p, n + q]
        free = [j for j in range(2 * n) if j not in fixed]
        rhs = -m[:, fixed].sum(axis=1)
        sol, *_ = np.linalg.lstsq(m[:, free], rhs, rcond=None)
        x_ls = np.empty(2 * n)
        x_ls[fixed] = 1.0
        x_ls[free] = sol
        # near a rank drop or with widely spread entries the anchored solve
        # loses accuracy; keep whichever vector satisfies the system better
        if sys_residual(x_ls) <= sys_residual(x_cf):
            x = x_ls
    residual = sys_residual(x)
    cf_err = float(np.max(np.abs(x_cf - x)) / np.max(np.abs(x)))

    _, jb = _jacobians(transform.entries, k)
    bvec = jb @ x
    cross = np.abs(np.outer(params.nu, bvec) - np.outer(bvec, params.nu))
    ratio_spread = float(np.max(cross) / (np.max(np.abs(params.nu)) * np.max(np.abs(bvec))))

    result = TildeSolve(x[:n].copy(), x[n:].copy(), float(k), system.rank(), residual, cf_err,
                        ratio_spread, float(k_num), p, q, system)
    if check:
        if residual > SYSTEM_RTOL:
            raise NumericalFailure(f"invariance system residual {residual:.3e} exceeds {SYSTEM_RTOL:.0e}",
                                   worst="system", value=residual)
    return result


@dataclass(frozen=True)
class InvarianceReport:
    """Comparison of ``grad S0`` and ``grad S0~`` at sample points."""

    max_grad_error: float
    s0_spread: float
    worst_point: np.ndarray
    tolerance: float
    spread_tolerance: float
    n_points: int

    @property
    def ok(self):
        return self.max_grad_error < self.tolerance and self.s0_spread < self.spread_tolerance

    def to_dict(self):
        return {
            "ok": bool(self.ok),
            "max_grad_error": self.max_grad_error,
            "s0_spread": self.s0_spread,
            "worst_point": self.worst_point.tolist(),
            "tolerance": self.tolerance,
            "n_points": self.n_points,
        }


def _phase_grad(hbar, psi1, psi2, g1, g2):
    p = psi1 * psi1 + psi2 * psi2
    return hbar * (psi2[:, None] * g1 - psi1[:, None] * g2) / p[:, None]


def default_tolerance(basis):
    analytic = all(pair.exact is not None for pair in basis.spec.axes)
    return 1e-9 if analytic else 1e-6


def verify_invariance(sol, transform, tilde, points, tol=None, l_tilde=0.0):
    """Check ``grad S0 = grad S0~`` with ``S0~`` built over ``theta = alpha phi``.

    The relative error of each component is measured against the largest
    component of ``grad S0`` at the same point. ``S0 - S0~`` is reduced
    modulo ``hbar*pi`` before its spread is taken.
    """
    if tol is None:
        tol = default_tolerance(sol.basis)
    pts = sol.basis._points(points)
    phi, grad, _ = sol.basis.evaluate(pts)
    # S0~ and its gradient do not see the scale of alpha; dropping it keeps P~ representable
    alpha = transform.entries / np.max(np.abs(transform.entries))
    theta = phi @ alpha.T
    gtheta = np.einsum("ij,njd->nid", alpha, grad)
    hbar = sol.constants.hbar
    nu, mu = sol.params.nu, sol.params.mu
    tn, tm = tilde.tilde_nu, tilde.tilde_mu
    psi1, psi2 = phi @ nu, phi @ mu
    t1, t2 = theta @ tn, theta @ tm
    g = _phase_grad(hbar, psi1, psi2, np.einsum("nid,i->nd", grad, nu), np.einsum("nid,i->nd", grad, mu))
    gt = _phase_grad(hbar, t1, t2, np.einsum("nid,i->nd", gtheta, tn), np.einsum("nid,i->nd", gtheta, tm))
    ref = np.max(np.abs(g), axis=1)
    ref[ref == 0.0] = 1.0
    err = np.max(np.abs(g - gt), axis=1) / ref
    worst = int(np.argmax(err))

    diff = (np.arctan2(psi1, psi2) + sol.params.l) - (np.arctan2(t1, t2) + l_tilde)
    d = np.mod(diff - diff[0] + 0.5 * np.pi, np.pi) - 0.5 * np.pi
    spread = float(hbar * (np.max(d) - np.min(d)))
    return InvarianceReport(float(err[worst]), spread, pts[worst].copy(), float(tol),
                            1e-9 * hbar, int(pts.shape[0]))


@dataclass(frozen=True)
class PertinentCount:
    """Rank evidence for the number of pertinent parameters."""

    dimension: int
    count: int
    rank: int
    unknowns: int
    full_rank: int
    anchored_rank: int
    ranks: tuple
    n_instances: int

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "rank": self.rank,
            "unknowns": self.unknowns,
            "pertinent_count": self.count,
            "full_system_rank": self.full_rank,
            "anchored_rank": self.anchored_rank,
            "n_instances": self.n_instances,
        }


def random_normalized_params(dimension, rng, nu_anchor=0, mu_anchor=-1):
    n = 2**dimension
    while True:
        nu, mu = rng.normal(size=n), rng.normal(size=n)
        nu[nu_anchor], mu[mu_anchor] = 1.0, 1.0
        try:
            return ActionParams(nu, mu)
        except InvalidInput:
            continue


def pertinent_parameter_count(dimension, rng=None, n_instances=20, nu_anchor=0, mu_anchor=-1):
    """Number of pertinent parameters, certified by numerical rank.

    For each random instance the reduced system must have rank ``2n - 1``,
    the unreduced monomial system the same rank, and the system augmented
    with the two anchor conditions full rank ``2n``. The count is then
    ``2n - 2``: the unknowns minus the ``nu~`` normalization and the ``k``
    choice.

    Raises
    ------
    NumericalFailure
        Some instance has a different rank.
    """
    if dimension not in (1, 2, 3):
        raise InvalidInput("dimension must be 1, 2 or 3")
    if n_instances < 1:
        raise InvalidInput("n_instances must be positive")
    rng = rng if rng is not None else np.random.default_rng(0)
    n = 2**dimension
    expected = 2 * n - 1
    ranks = []
    full_rank = anchored_rank = None
    for inst in range(n_instances):
        params = random_normalized_params(dimension, rng, nu_anchor, mu_anchor)
        transform = TransformMatrix.random(dimension, rng)
        k = rng.normal()
        reduced = build_invariance_system(params, transform, k)
        full = build_full_system(params, transform, k)
        anchors = np.zeros((2, 2 * n))
        anchors[0, nu_anchor % n] = 1.0
        anchors[1, n + mu_anchor % n] = 1.0
        anchored = InvarianceSystem(np.vstack([reduced.matrix, anchors]), ())
        r, fr, ar = reduced.rank(), full.rank(), anchored.rank()
        ranks.append(r)
        if r != expected or fr != expected or ar != 2 * n:
            raise NumericalFailure(
                f"instance {inst}: ranks reduced={r}, full={fr}, anchored={ar}; expected "
                f"{expected}, {expected}, {2 * n}",
                worst=inst, value=(r, fr, ar),
            )
        full_rank, anchored_rank = fr, ar
    return PertinentCount(dimension, expected - 1, expected, 2 * n, full_rank, anchored_rank,
                          tuple(ranks), n_instances)

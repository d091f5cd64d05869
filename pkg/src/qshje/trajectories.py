"""Quantum trajectories ``m dx/dt = grad S0``.

Integration is classical fixed-step RK4. Leaving the domain box ends a
trajectory cleanly: the last partial step is shortened by bisection so the
exit time is recorded. When every axis is a tabulated Numerov pair the loop
runs in the compiled kernel; analytic axes use the vectorized Python path.

The law of motion is taken as given for every dimension; it is an
assumption of the model rather than a consequence of the stationary
equations.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidInput, UndefinedPhase
from .microstates import coefficients_match
from .reduced_action import grad_s0, residual_qshje

COMPLETED = "completed"
EXITED = "exited"
UNDEFINED = "undefined-phase"
_STATUS = {0: COMPLETED, 1: EXITED, 2: UNDEFINED}
EXIT_BISECTIONS = 60


def params_id(params):
    """Short stable digest of an ``ActionParams``."""
    blob = json.dumps(params.to_dict(), sort_keys=True).encode()
    return hashlib.sha1(blob).hexdigest()[:12]


def velocity(sol, point):
    """``grad S0 / m`` at one point or a batch.

    Raises
    ------
    UndefinedPhase
        If ``psi1 = psi2 = 0`` at a point.
    """
    return grad_s0(sol, point) / sol.constants.mass


@dataclass(frozen=True)
class TrajectoryRecord:
    """Times and positions of one integrated trajectory.

    ``status`` is ``"completed"``, ``"exited"`` (the last row sits on the box
    boundary at ``exit_time``) or ``"undefined-phase"`` (halted before a
    stage hit ``psi1 = psi2 = 0``).
    """

    times: np.ndarray
    positions: np.ndarray
    params_id: str
    energy: float
    status: str = COMPLETED
    exit_time: float = None
    backend: str = "python"
    diagnostic: str = ""

    @property
    def final(self):
        return self.positions[-1]

    def velocities(self, sol):
        return np.atleast_2d(velocity(sol, self.positions))

    def summary(self):
        return {
            "status": self.status,
            "steps": int(self.times.size - 1),
            "t_final": float(self.times[-1]),
            "x_final": [float(v) for v in self.final],
            "exit_time": None if self.exit_time is None else float(self.exit_time),
            "params_id": self.params_id,
            "energy": float(self.energy),
            "backend": self.backend,
            "diagnostic": self.diagnostic,
        }


def _inside(x, lo, hi):
    return bool(np.all(x >= lo) and np.all(x <= hi))


def _rk4_step(f, x, dt, lo, hi):
    """One RK4 step; ``None`` if a stage point leaves the box."""
    k1 = f(x)
    y = x + 0.5 * dt * k1
    if not _inside(y, lo, hi):
        return None
    k2 = f(y)
    y = x + 0.5 * dt * k2
    if not _inside(y, lo, hi):
        return None
    k3 = f(y)
    y = x + dt * k3
    if not _inside(y, lo, hi):
        return None
    k4 = f(y)
    y = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y if _inside(y, lo, hi) else None


def _tabulated(sol):
    axes = sol.basis.spec.axes
    if any(p.exact is not None for p in axes):
        return None
    nmax = max(p.grid.size for p in axes)
    d = len(axes)
    grids = np.zeros((d, nmax))
    tab = np.zeros((d, 6, nmax))
    npts = np.zeros(d, dtype=np.int_)
    for a, p in enumerate(axes):
        m = p.grid.size
        npts[a] = m
        grids[a, :m] = p.grid
        tab[a, :, :m] = (p.values1, p.deriv1, p.second1, p.values2, p.deriv2, p.second2)
    return grids, npts, tab


def integrate(sol, x0, t_end, dt, use_kernel=True):
    """Integrate ``dx/dt = grad S0 / m`` from ``x0`` over ``[0, t_end]``.

    Parameters
    ----------
    sol : QshjeSolution
    x0 : array_like
        Interior starting point.
    t_end, dt : float
        ``t_end`` should be a multiple of ``dt``; the step count is rounded.
    use_kernel : bool
        Allow the tabulated kernel when all axes are Numerov pairs.

    Returns
    -------
    TrajectoryRecord
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    lo, hi = sol.basis.lower, sol.basis.upper
    if x0.size != sol.dimension:
        raise InvalidInput(f"x0 must have {sol.dimension} coordinates")
    if not (np.all(x0 > lo) and np.all(x0 < hi)):
        raise InvalidInput("x0 must be interior to the domain box")
    if not dt > 0 or not t_end >= 0:
        raise InvalidInput("need dt > 0 and t_end >= 0")
    nsteps = int(round(t_end / dt))
    pid = params_id(sol.params)
    hbar_m = sol.constants.hbar / sol.constants.mass

    def f(x):
        return velocity(sol, x).reshape(-1)

    try:
        f(x0)
    except UndefinedPhase as exc:
        return TrajectoryRecord(np.zeros(1), x0[None, :], pid, sol.energy, UNDEFINED, backend="python",
                                diagnostic=str(exc))

    table = _tabulated(sol) if use_kernel else None
    if table is not None:
        grids, npts, tab = table
        pos, done, code = kernels.rk4_tabulated(
            grids, npts, tab, sol.params.nu, sol.params.mu, sol.basis.selectors.astype(np.int_),
            hbar_m, lo, hi, x0, float(dt), nsteps,
        )
        positions = [np.array(p) for p in np.asarray(pos)[: done + 1]]
        status, backend = _STATUS[int(code)], kernels.BACKEND
    else:
        positions = [x0]
        status, backend = COMPLETED, "python"
        x = x0
        for _ in range(nsteps):
            try:
                y = _rk4_step(f, x, dt, lo, hi)
            except UndefinedPhase:
                status = UNDEFINED
                break
            if y is None:
                status = EXITED
                break
            positions.append(y)
            x = y

    times = dt * np.arange(len(positions), dtype=float)
    exit_time, diag = None, ""
    if status == EXITED:
        # largest partial step that stays inside
        x = positions[-1]
        a, b = 0.0, float(dt)
        best = None
        for _ in range(EXIT_BISECTIONS):
            mid = 0.5 * (a + b)
            y = _rk4_step(f, x, mid, lo, hi)
            if y is None:
                b = mid
            else:
                a, best = mid, y
        if best is not None:
            positions.append(best)
            times = np.append(times, times[-1] + a)
        exit_time = float(times[-1])
        diag = "left the domain box"
    elif status == UNDEFINED:
        diag = f"phase undefined near {positions[-1].tolist()}"
    return TrajectoryRecord(times, np.array(positions), pid, sol.energy, status, exit_time, backend, diag)


def energy_constancy(sol, record):
    """Max normalized ``|H - E|`` along a trajectory, with ``H`` the left side of the
    quantum Hamilton-Jacobi equation and normalization ``|E| + sum max|V|``."""
    report = residual_qshje(sol, record.positions)
    return report.max_qhje()


@dataclass(frozen=True)
class DivergenceReport:
    """Pairwise separation of family trajectories.

    ``pairwise_max[i, j]`` is the largest distance over the common recorded
    times, ``pairwise_final[i, j]`` the distance at the last common time.
    """

    pairwise_max: np.ndarray
    pairwise_final: np.ndarray
    records: list = field(repr=False)

    @property
    def max_separation(self):
        return float(self.pairwise_max.max()) if self.pairwise_max.size else 0.0

    @property
    def min_final_separation(self):
        m = self.pairwise_final.shape[0]
        if m < 2:
            return 0.0
        return float(min(self.pairwise_final[i, j] for i, j in itertools.combinations(range(m), 2)))

    def to_dict(self):
        return {
            "members": len(self.records),
            "max_separation": self.max_separation,
            "min_final_separation": self.min_final_separation,
            "pairwise_max": self.pairwise_max.tolist(),
            "pairwise_final": self.pairwise_final.tolist(),
            "trajectories": [r.summary() for r in self.records],
        }


def check_same_wavefunction(family, rtol=1e-12):
    """Raise unless all members share the basis and ``psi2`` up to scale.

    For a real wave function the coefficients are proportional to ``mu``,
    so sharing one wave function means proportional ``mu`` vectors.
    """
    first = family[0]
    for k, sol in enumerate(family[1:], start=1):
        if sol.basis is not first.basis and sol.basis != first.basis:
            raise InvalidInput(f"family member {k} uses a different basis")
        if coefficients_match(first.params.mu, sol.params.mu) > rtol:
            raise InvalidInput(f"family member {k} describes a different wave function")


def family_divergence(family, x0, t_end, dt, check=True, use_kernel=True):
    """Integrate every member from ``x0`` and measure how far they separate."""
    family = list(family)
    if not family:
        raise InvalidInput("empty family")
    if check:
        check_same_wavefunction(family)
    records = [integrate(sol, x0, t_end, dt, use_kernel=use_kernel) for sol in family]
    m = len(records)
    pmax = np.zeros((m, m))
    pfin = np.zeros((m, m))
    for i, j in itertools.combinations(range(m), 2):
        n = min(records[i].positions.shape[0], records[j].positions.shape[0])
        dist = np.linalg.norm(records[i].positions[:n] - records[j].positions[:n], axis=1)
        pmax[i, j] = pmax[j, i] = dist.max()
        pfin[i, j] = pfin[j, i] = dist[-1]
    return DivergenceReport(pmax, pfin, records)

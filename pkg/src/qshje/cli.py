"""Command-line front end.

Usage::

    qshje {basis,verify,invariance,microstates,trajectory} --config run.toml [--seed N] [--out DIR] [--quiet]

Exit codes: 0 success, 2 configuration error, 3 a tolerance was missed,
4 degenerate input (undefined phase, singular transform, coefficients that
do not fit the normalized form).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .basis1d import ode_residual
from .config import ConfigError, load_config
from .errors import DegenerateInput, InvalidInput, NumericalFailure, QshjeError
from .invariance import (TransformMatrix, pertinent_parameter_count, random_normalized_params,
                         solve_tilde, verify_invariance)
from .io import dumps, write_csv, write_json
from .microstates import (COMPLEX_UNIQUE, bohm_diagnostic, enumerate_family, identify)
from .reduced_action import QshjeSolution, residual_1d_schwarzian, residual_qshje
from .trajectories import energy_constancy, family_divergence, integrate

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE, EXIT_DEGENERATE = 0, 2, 3, 4

log = logging.getLogger("qshje")


def _header(cfg, command):
    return {"command": command, "seed": cfg.seed, "config": cfg.source,
            "backend": kernels.BACKEND, "version": __version__}


def _sample_points(basis, rng, n):
    lo, hi = basis.lower, basis.upper
    u = rng.uniform(0.0, 1.0, size=(n, basis.dimension))
    return lo + (hi - lo) * u


def _solution(cfg, basis):
    """Solution from ``[params]``, or from complex-case ``[coefficients]``."""
    if cfg.params is not None:
        return QshjeSolution(basis, cfg.params)
    if cfg.coefficients is not None:
        res = identify(cfg.coefficients, cfg.identify_tol)
        if res.case != COMPLEX_UNIQUE:
            raise ConfigError("real coefficients fix no unique parameters; use the microstates command")
        return QshjeSolution(basis, res.params())
    raise ConfigError("this command needs [params] or [coefficients]")


def cmd_basis(cfg, out):
    """Basis CSV per axis plus a Wronskian/residual report."""
    basis = cfg.build_basis()
    axes = []
    for a, pair in enumerate(basis.spec.axes):
        drift, idx = pair.wronskian_drift()
        hdr = {**_header(cfg, "basis"), "axis": a, "energy": pair.energy}
        path = write_csv(out / f"basis_axis{a}.csv", ["x", "psi1", "dpsi1", "psi2", "dpsi2"],
                         np.column_stack([pair.grid, pair.values1, pair.deriv1, pair.values2, pair.deriv2]), hdr)
        axes.append({
            "axis": a,
            "energy": pair.energy,
            "construction": pair.construction,
            "wronskian": pair.wronskian_ref,
            "wronskian_drift": drift,
            "wronskian_drift_node": float(pair.grid[idx]),
            "ode_residual": float(np.max(np.abs(ode_residual(pair)))),
            "csv": path.name,
            "spec": cfg.axes[a].describe(),
        })
    summary = {**_header(cfg, "basis"), "total_energy": basis.energy, "axes": axes}
    write_json(out / "basis.json", summary)
    return EXIT_OK, summary


def cmd_verify(cfg, out):
    """Residuals of the QSHJE system at random interior points."""
    basis = cfg.build_basis()
    sol = _solution(cfg, basis)
    pts = _sample_points(basis, cfg.rng(), cfg.n_points)
    rep = residual_qshje(sol, pts)
    cols = ["x", "y", "z"][: basis.dimension] + ["residual_qhje", "residual_continuity", "scale"]
    write_csv(out / "residuals.csv", cols,
              np.column_stack([pts, rep.residual_qhje, rep.residual_continuity, rep.scale]),
              _header(cfg, "verify"))
    summary = {**_header(cfg, "verify"), **rep.summary(), "tolerance": cfg.residual_tol}
    worst = max(rep.max_qhje(), rep.max_continuity())
    if basis.dimension == 1:
        s = np.abs(residual_1d_schwarzian(sol, pts[:, 0], normalize=True))
        summary["third_order"] = {"max": float(s.max()), "mean": float(s.mean())}
        worst = max(worst, float(s.max()))
    summary["ok"] = worst <= cfg.residual_tol
    write_json(out / "residuals.json", summary)
    return (EXIT_OK if summary["ok"] else EXIT_TOLERANCE), summary


def cmd_invariance(cfg, out):
    """Tilde parameters for one transform, their check, and the rank count."""
    rng = cfg.rng()
    d = cfg.dimension
    basis = cfg.build_basis()
    params = cfg.params.normalized() if cfg.params is not None else random_normalized_params(d, rng)
    transform = cfg.transform if cfg.transform is not None else TransformMatrix.random(d, rng)
    tilde = solve_tilde(params, transform)
    sol = QshjeSolution(basis, params)
    pts = _sample_points(basis, rng, min(cfg.n_points, 1000))
    rep = verify_invariance(sol, transform, tilde, pts, tol=cfg.invariance_tol)
    count = pertinent_parameter_count(d, rng, n_instances=cfg.n_instances)
    summary = {
        **_header(cfg, "invariance"),
        **count.to_dict(),
        "worst_invariance_error": rep.max_grad_error,
        "s0_spread": rep.s0_spread,
        "invariance": rep.to_dict(),
        "k": tilde.k,
        "tilde": {"nu": tilde.tilde_nu.tolist(), "mu": tilde.tilde_mu.tolist()},
        "transform": transform.entries.tolist(),
    }
    write_json(out / "invariance.json", summary)
    return (EXIT_OK if rep.ok else EXIT_TOLERANCE), summary


def _write_trajectory(path, cfg, sol, record, extra=None):
    d = sol.dimension
    vel = record.velocities(sol)
    cols = ["t"] + ["x", "y", "z"][:d] + ["vx", "vy", "vz"][:d]
    hdr = {**_header(cfg, "trajectory"), **record.summary(), **(extra or {})}
    write_csv(path, cols, np.column_stack([record.times, record.positions, vel]), hdr)


def cmd_microstates(cfg, out):
    """Identify parameters from coefficients; enumerate and integrate families."""
    if cfg.coefficients is None:
        raise ConfigError("the microstates command needs [coefficients]")
    res = identify(cfg.coefficients, cfg.identify_tol)
    summary = {**_header(cfg, "microstates"), "coefficients": cfg.coefficients.to_pairs(),
               **res.to_dict(), "bohm": bohm_diagnostic(cfg.coefficients).to_dict()}
    if res.case != COMPLEX_UNIQUE:
        samples = cfg.nu_samples
        if samples is None:
            samples = cfg.rng().uniform(-1.0, 1.0, size=(3, res.mu.size - 1)).tolist()
        notes = []
        family = enumerate_family(res, samples, notes)
        summary["family"] = [p.to_dict() for p in family]
        summary["notes"] = notes
        if cfg.trajectory is not None and family:
            basis = cfg.build_basis()
            sols = [QshjeSolution(basis, p) for p in family]
            tr = cfg.trajectory
            div = family_divergence(sols, tr.x0, tr.t_end, tr.dt)
            for k, (s, r) in enumerate(zip(sols, div.records)):
                _write_trajectory(out / f"trajectory_member{k}.csv", cfg, s, r, {"member": k})
            write_json(out / "divergence.json", {**_header(cfg, "microstates"), **div.to_dict()})
            summary["divergence"] = {"max_separation": div.max_separation,
                                     "min_final_separation": div.min_final_separation}
    write_json(out / "microstates.json", summary)
    return EXIT_OK, summary


def cmd_trajectory(cfg, out):
    """One trajectory of ``m dx/dt = grad S0``."""
    if cfg.trajectory is None:
        raise ConfigError("the trajectory command needs [trajectory]")
    basis = cfg.build_basis()
    sol = _solution(cfg, basis)
    tr = cfg.trajectory
    rec = integrate(sol, tr.x0, tr.t_end, tr.dt)
    drift = energy_constancy(sol, rec)
    _write_trajectory(out / "trajectory.csv", cfg, sol, rec)
    summary = {**_header(cfg, "trajectory"), **rec.summary(), "energy_constancy": drift}
    write_json(out / "trajectory.json", summary)
    return EXIT_OK, summary


COMMANDS = {
    "basis": cmd_basis,
    "verify": cmd_verify,
    "invariance": cmd_invariance,
    "microstates": cmd_microstates,
    "trajectory": cmd_trajectory,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="qshje", description="Quantum stationary Hamilton-Jacobi toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--quiet", action="store_true", help="print nothing on success")
    return parser


def _exit_code(exc):
    if isinstance(exc, InvalidInput):
        return EXIT_CONFIG
    if isinstance(exc, DegenerateInput):
        return EXIT_DEGENERATE
    if isinstance(exc, NumericalFailure):
        return EXIT_TOLERANCE
    return EXIT_TOLERANCE


def _error_payload(exc, command, seed):
    payload = {"command": command, "seed": seed, "error": type(exc).__name__, "message": str(exc)}
    detail = getattr(exc, "detail", None)
    if detail is not None:
        payload["detail"] = detail
    if isinstance(exc, NumericalFailure):
        payload["worst"] = exc.worst
        payload["value"] = exc.value
    return payload


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    out = None
    seed = args.seed
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        seed = cfg.seed
        out = Path(args.out if args.out is not None else cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        code, summary = COMMANDS[args.command](cfg, out)
    except (ConfigError, QshjeError) as exc:
        code = _exit_code(exc)
        payload = _error_payload(exc, args.command, seed)
        if out is not None:
            write_json(out / "error.json", payload)
        print(dumps(payload), file=sys.stderr)
        return code
    if not args.quiet:
        print(dumps(summary))
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Time the compiled and pure-Python kernel backends on identical inputs.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--nodes 4001] [--json out.json]

Each kernel is run on both backends with the same arrays; the table gives
the best wall time over ``--repeat`` runs and the largest output difference.
"""

import argparse
import json
import time

import numpy as np

from qshje.basis1d import solve_numerov
from qshje.kernels import available_backends
from qshje.potentials import PhysicalConstants, Potential1D
from qshje.product_basis import ActionParams, ProductBasis, SeparableSpec, selectors
from qshje.reduced_action import QshjeSolution
from qshje.trajectories import _tabulated


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n_nodes, n_eval, n_steps):
    """Inputs for each kernel, built once and shared by both backends."""
    pot = Potential1D.harmonic(1.0, (-10.0, 10.0))
    pair = solve_numerov(pot, 0.5, PhysicalConstants(), n_nodes=n_nodes)
    grid = pair.grid
    f = 2.0 * (pot(grid) - 0.5)
    h = grid[1] - grid[0]
    x = np.random.default_rng(0).uniform(grid[0], grid[-1], n_eval)

    basis = ProductBasis(SeparableSpec((pair, pair, pair)))
    nu = np.array([1.0, 0.2, -0.3, 0.1, 0.4, -0.2, 0.3, 0.5])
    mu = np.array([0.3, -0.1, 0.2, 0.6, -0.4, 0.1, 0.2, 1.0])
    grids, npts, tab = _tabulated(QshjeSolution(basis, ActionParams(nu, mu)))
    sel = selectors(3).astype(np.int_)
    lo, hi = basis.lower, basis.upper
    x0 = np.array([0.3, -0.2, 0.5])
    return {
        "numerov_sweep": lambda k: k.numerov_sweep(f, h, 0.0, 1e-6),
        "hermite_eval": lambda k: np.asarray(k.hermite_eval(grid, pair.values1, pair.deriv1, pair.second1, x)[0]),
        "rk4_tabulated": lambda k: np.asarray(k.rk4_tabulated(grids, npts, tab, nu, mu, sel, 1.0, lo, hi, x0,
                                                               1e-3, n_steps)[0]),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--nodes", type=int, default=4001)
    ap.add_argument("--points", type=int, default=20000, help="hermite evaluation points")
    ap.add_argument("--steps", type=int, default=2000, help="RK4 steps in 3D")
    ap.add_argument("--json", default=None, help="also write results here")
    args = ap.parse_args(argv)

    backends = available_backends()
    rows = []
    for name, fn in cases(args.nodes, args.points, args.steps).items():
        times, outs = {}, {}
        for bname, mod in backends.items():
            times[bname], outs[bname] = best_time(lambda: fn(mod), args.repeat)
        row = {"kernel": name, **{f"{b}_s": t for b, t in times.items()}}
        if "compiled" in times:
            row["speedup"] = times["python"] / times["compiled"]
            row["max_abs_diff"] = float(np.max(np.abs(outs["python"] - outs["compiled"])))
        rows.append(row)

    print(f"{'kernel':<15}" + "".join(f"{b + ' [s]':>14}" for b in backends) + f"{'speedup':>10}{'max diff':>12}")
    for r in rows:
        line = f"{r['kernel']:<15}" + "".join(f"{r[b + '_s']:>14.5f}" for b in backends)
        if "speedup" in r:
            line += f"{r['speedup']:>10.1f}{r['max_abs_diff']:>12.2e}"
        print(line)
    if "compiled" not in backends:
        print("compiled extension not importable; only the python backend was timed")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()

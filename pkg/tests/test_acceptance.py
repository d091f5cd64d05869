"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines appear in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import free_basis  # noqa: E402

from qshje.basis1d import analytic_pair, solve_numerov  # noqa: E402
from qshje.invariance import (TransformMatrix, pertinent_parameter_count, random_normalized_params,  # noqa: E402
                              solve_tilde, verify_invariance)
from qshje.microstates import (COMPLEX_UNIQUE, bohm_diagnostic, coefficients_match,  # noqa: E402
                               compose_coefficients, enumerate_family, identify)
from qshje.potentials import PhysicalConstants, Potential1D  # noqa: E402
from qshje.product_basis import ActionParams, ProductBasis, SeparableSpec, check_product_relations  # noqa: E402
from qshje.reduced_action import QshjeSolution, residual_1d_schwarzian, residual_qshje  # noqa: E402
from qshje.trajectories import energy_constancy, family_divergence, integrate  # noqa: E402

RESULTS = {}
TWO_PI = 2.0 * np.pi


def _random_params(rng, n):
    while True:
        nu, mu = rng.normal(size=n), rng.normal(size=n)
        if np.linalg.svd(np.vstack([nu, mu]), compute_uv=False)[1] > 1e-3:
            return ActionParams(nu, mu, rng.normal())


def _harmonic_basis():
    pot = Potential1D.harmonic(1.0, (-10.0, 10.0))
    pair = solve_numerov(pot, 0.5, PhysicalConstants(), n_nodes=4001)
    return ProductBasis(SeparableSpec((pair,)))


def criterion_1():
    """QSHJE residuals on free bases in 1/2/3D."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for d in (1, 2, 3):
        basis = free_basis(d, k=[1.0, 1.3, 0.8][:d])
        for _ in range(50):
            sol = QshjeSolution(basis, _random_params(rng, 2**d))
            rep = residual_qshje(sol, rng.uniform(0.0, TWO_PI, (100, d)))
            worst = max(worst, rep.max_qhje(), rep.max_continuity())
    dt = time.perf_counter() - t0
    return worst < 1e-10 and dt < 5.0, f"max residual {worst:.2e} (< 1e-10), {dt:.2f} s (< 5 s)"


def criterion_2():
    """Numerov harmonic residuals, third-order and coupled forms."""
    t0 = time.perf_counter()
    basis = _harmonic_basis()
    rng = np.random.default_rng(102)
    x = rng.uniform(-10.0, 10.0, 1000)
    worst6 = worst12 = 0.0
    for p in (ActionParams([1.0, 0.0], [0.0, 1.0]), _random_params(rng, 2)):
        sol = QshjeSolution(basis, p)
        worst6 = max(worst6, float(np.max(np.abs(residual_1d_schwarzian(sol, x, normalize=True)))))
        rep = residual_qshje(sol, x)
        worst12 = max(worst12, rep.max_qhje(), rep.max_continuity())
        if rep.excluded.any():
            return False, f"{int(rep.excluded.sum())} points excluded"
    dt = time.perf_counter() - t0
    ok = worst6 < 1e-6 and worst12 < 1e-6 and dt < 5.0
    return ok, f"third-order {worst6:.2e}, coupled {worst12:.2e} (< 1e-6), {dt:.2f} s (< 5 s)"


def criterion_3():
    """Conjugate-momentum invariance under 100 random transforms per dimension."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(103)
    worst_g = worst_s = 0.0
    for d in (1, 2, 3):
        basis = free_basis(d)
        for _ in range(100):
            sol = QshjeSolution(basis, random_normalized_params(d, rng))
            t = TransformMatrix.random(d, rng)
            rep = verify_invariance(sol, t, solve_tilde(sol.params, t), rng.uniform(0.0, TWO_PI, (50, d)))
            worst_g, worst_s = max(worst_g, rep.max_grad_error), max(worst_s, rep.s0_spread)
    dt = time.perf_counter() - t0
    ok = worst_g < 1e-9 and worst_s < 1e-9 and dt < 30.0
    return ok, f"grad deviation {worst_g:.2e}, S0 spread {worst_s:.2e} (< 1e-9), {dt:.2f} s (< 30 s)"


def criterion_4():
    """Rank of the invariance system and the pertinent parameter count."""
    rng = np.random.default_rng(104)
    got = {}
    for d, (rank, count) in {1: (3, 2), 2: (7, 6), 3: (15, 14)}.items():
        pc = pertinent_parameter_count(d, rng, n_instances=20)
        got[d] = (pc.rank, pc.count)
        if pc.rank != rank or pc.count != count or set(pc.ranks) != {rank}:
            return False, f"dimension {d}: rank {pc.rank}, count {pc.count}"
    return True, "ranks 3/7/15, counts " + "/".join(str(got[d][1]) for d in (1, 2, 3))


def criterion_5():
    """Product relations among the basis products."""
    rng = np.random.default_rng(105)
    worst = 0.0
    for d in (2, 3):
        rep = check_product_relations(free_basis(d, k=[0.9, 1.4, 2.1][:d]), rng.uniform(0.0, TWO_PI, (1000, d)))
        worst = max(worst, rep.max_deviation)
    return worst < 1e-12, f"max normalized deviation {worst:.2e} (< 1e-12)"


def criterion_6():
    """Microstate round trip in the complex case."""
    rng = np.random.default_rng(106)
    worst = 0.0
    for d in (1, 3):
        done = 0
        while done < 1000:
            p = random_normalized_params(d, rng)
            a, b = rng.uniform(0.1, 3.0, 2)
            if abs(a - b) < 1e-2:
                continue
            r = identify(compose_coefficients(p, a, b))
            if r.case != COMPLEX_UNIQUE:
                return False, f"dimension {d}: complex instance classified {r.case}"
            err = max(abs(r.modulus_alpha - a), abs(r.modulus_beta - b),
                      float(np.max(np.abs(r.mu - p.mu))), float(np.max(np.abs(r.nu - p.nu))))
            worst = max(worst, err)
            done += 1
    return worst < 1e-12, f"max recovery error {worst:.2e} (< 1e-12) over 2000 instances"


def criterion_7():
    """Microstate family: one wave function, distinct converged trajectories."""
    basis = _harmonic_basis()
    r = identify([1.0, 0.5])
    fam = enumerate_family(r, [[-1.0], [0.0], [1.0]])
    cs = [compose_coefficients(p, r.modulus_alpha, r.modulus_beta).c for p in fam]
    match = max(coefficients_match(cs[0], c) for c in cs[1:])
    sols = [QshjeSolution(basis, p) for p in fam]
    coarse = family_divergence(sols, [0.3], 2.0, 0.01)
    fine = family_divergence(sols, [0.3], 2.0, 0.005)
    sep_c = coarse.pairwise_final[np.triu_indices(3, 1)]
    sep_f = fine.pairwise_final[np.triu_indices(3, 1)]
    drift = float(np.max(np.abs(sep_c - sep_f) / sep_f))
    ok = match < 1e-12 and np.all(sep_f > 0) and drift < 0.01
    return ok, (f"coefficient mismatch {match:.1e} (< 1e-12), final separations "
                f"{', '.join(f'{s:.4f}' for s in sep_f)}, dt-halving change {drift:.1e} (< 1%)")


def criterion_8():
    """Bohm ansatz diagnostic."""
    rng = np.random.default_rng(108)
    for d in (1, 2, 3):
        for _ in range(100):
            p = random_normalized_params(d, rng)
            if bohm_diagnostic(compose_coefficients(p, 2.0, 1.0)).compatible:
                return False, f"(2, 1) coefficients flagged compatible in {d}D"
            c = compose_coefficients(p, 1.0, 0.0).c
            rep = bohm_diagnostic(c)
            if not (c[0].imag == 1.0 and c[-1].real == 1.0 and rep.compatible):
                return False, f"(1, 0) coefficients in {d}D: Im c1 = {c[0].imag!r}, Re c_last = {c[-1].real!r}"
    return True, "(2, 1) always incompatible; (1, 0) gives Im c1 = Re c_last = 1 exactly"


def criterion_9():
    """Trajectory sanity: exact free motion, RK4 order, constancy of the energy relation."""
    line = ProductBasis(SeparableSpec((analytic_pair("free", {"k": 1.0}, domain=(-5.0, 5.0)),)))
    rec = integrate(QshjeSolution(line, ActionParams([1.0, 0.0], [0.0, 1.0])), [0.0], 1.0, 1e-3)
    free_err = abs(rec.final[0] - 1.0)
    basis = _harmonic_basis()
    r = identify([1.0, 0.5])
    sols = [QshjeSolution(basis, p) for p in enumerate_family(r, [[-1.0], [0.0], [1.0]])]
    ref = integrate(sols[0], [0.3], 2.0, 0.1 / 8).final[0]
    e1 = abs(integrate(sols[0], [0.3], 2.0, 0.1).final[0] - ref)
    e2 = abs(integrate(sols[0], [0.3], 2.0, 0.05).final[0] - ref)
    ratio = e1 / e2
    drift = max(energy_constancy(s, integrate(s, [0.3], 2.0, 0.01)) for s in sols)
    ok = free_err < 1e-10 and 12.0 <= ratio <= 20.0 and drift < 1e-6
    return ok, f"free x(1) error {free_err:.1e} (< 1e-10), RK4 ratio {ratio:.2f} (in [12, 20]), energy drift {drift:.1e} (< 1e-6)"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def _line(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n):
    ok, detail = CRITERIA[n - 1]()
    RESULTS[n] = _line(n, ok, detail)
    print(RESULTS[n])
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        failed += not ok
        print(_line(n, ok, detail), flush=True)
    sys.exit(1 if failed else 0)

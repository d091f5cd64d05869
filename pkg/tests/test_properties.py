"""Property-based checks of the structural invariants."""

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qshje.basis1d import analytic_pair
from qshje.errors import DegenerateInput, InvalidInput
from qshje.invariance import TransformMatrix, solve_tilde, verify_invariance
from qshje.microstates import (COMPLEX_UNIQUE, coefficients_match, compose_coefficients, enumerate_family,
                               identify, is_real_case)
from qshje.product_basis import ActionParams, ProductBasis, SeparableSpec, check_product_relations
from qshje.reduced_action import QshjeSolution, eval_r, grad_s0, residual_qshje

from conftest import free_basis

BASES = {d: free_basis(d) for d in (1, 2, 3)}
TWO_PI = 2.0 * np.pi

coef = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
dims = st.sampled_from([1, 2, 3])
SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def normalized_params(draw, d):
    n = 2**d
    nu = draw(arrays(float, n, elements=coef))
    mu = draw(arrays(float, n, elements=coef))
    nu[0], mu[-1] = 1.0, 1.0
    # keep away from nearly dependent pairs
    assume(np.linalg.svd(np.vstack([nu, mu]), compute_uv=False)[1] > 1e-3)
    return ActionParams(nu, mu, draw(st.floats(-5, 5)))


@st.composite
def solution_and_points(draw):
    d = draw(dims)
    p = draw(normalized_params(d))
    pts = draw(arrays(float, (5, d), elements=st.floats(0.05, TWO_PI - 0.05)))
    return QshjeSolution(BASES[d], p), pts


@SETTINGS
@given(solution_and_points())
def test_residuals_free(data):
    sol, pts = data
    r = eval_r(sol, pts)
    assume(np.min(np.atleast_1d(r)) > 1e-6)
    rep = residual_qshje(sol, pts)
    assert rep.max_qhje() < 1e-10 and rep.max_continuity() < 1e-10


@SETTINGS
@given(solution_and_points(), st.floats(-10, 10))
def test_residuals_ignore_l(data, l2):
    sol, pts = data
    assume(np.min(np.atleast_1d(eval_r(sol, pts))) > 1e-6)
    other = sol.with_params(ActionParams(sol.params.nu, sol.params.mu, l2))
    a, b = residual_qshje(sol, pts), residual_qshje(other, pts)
    np.testing.assert_array_equal(a.residual_qhje, b.residual_qhje)


@SETTINGS
@given(normalized_params(1), st.floats(0.05, TWO_PI - 0.05))
def test_1d_momentum_identity(p, x):
    sol = QshjeSolution(BASES[1], p)
    w = p.nu[0] * p.mu[1] - p.nu[1] * p.mu[0]
    g = grad_s0(sol, x)[0]
    np.testing.assert_allclose(g * eval_r(sol, x) ** 2, w, rtol=1e-8)
    assert g != 0.0


@SETTINGS
@given(solution_and_points())
def test_r_nonnegative(data):
    sol, pts = data
    assert np.all(np.atleast_1d(eval_r(sol, pts)) >= 0.0)


@SETTINGS
@given(dims, arrays(float, (4, 3), elements=st.floats(0.0, TWO_PI)))
def test_product_relations(d, pts):
    if d == 1:
        return
    assert check_product_relations(BASES[d], pts[:, :d]).max_deviation < 1e-12


@SETTINGS
@given(dims, st.data())
def test_invariance_under_transform(d, data):
    p = data.draw(normalized_params(d))
    n = 2**d
    m = data.draw(arrays(float, (n, n), elements=st.floats(-2, 2)))
    assume(np.linalg.cond(m) < 1e3)
    t = TransformMatrix(m)
    try:
        tilde = solve_tilde(p, t)
    except DegenerateInput:
        assume(False)
    sol = QshjeSolution(BASES[d], p)
    pts = data.draw(arrays(float, (5, d), elements=st.floats(0.05, TWO_PI - 0.05)))
    assume(np.min(np.atleast_1d(eval_r(sol, pts))) > 1e-3)
    rep = verify_invariance(sol, t, tilde, pts)
    assert rep.max_grad_error < 1e-7


@SETTINGS
@given(dims, st.data(), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_microstate_round_trip(d, data, a, b):
    assume(abs(a - b) > 1e-3)
    a, b = max(a, b), min(a, b)
    p = data.draw(normalized_params(d))
    r = identify(compose_coefficients(p, a, b))
    assert r.case == COMPLEX_UNIQUE
    np.testing.assert_allclose([r.modulus_alpha, r.modulus_beta], [a, b], atol=1e-12)
    np.testing.assert_allclose(r.mu, p.mu, atol=1e-10)
    np.testing.assert_allclose(r.nu, p.nu, atol=1e-10)


@SETTINGS
@given(dims, st.data(), st.floats(0.1, 3.0), st.floats(0.05, 10.0))
def test_positive_scale_gauge(d, data, a, lam):
    p = data.draw(normalized_params(d))
    c = compose_coefficients(p, a + 1.0, a).c
    r1, r2 = identify(c), identify(lam * c)
    np.testing.assert_allclose(r2.modulus_alpha, lam * r1.modulus_alpha, rtol=1e-12)
    np.testing.assert_allclose(r2.mu, r1.mu, atol=1e-10)
    np.testing.assert_allclose(r2.nu, r1.nu, atol=1e-10)


@SETTINGS
@given(dims, st.data(), st.floats(0.0, np.pi))
def test_real_family_invisible(d, data, theta):
    n = 2**d
    x = data.draw(arrays(float, n, elements=coef))
    assume(np.linalg.norm(x) > 1e-3 and np.max(np.abs(x)) > 0.1)
    c = x * np.exp(1j * theta)
    assert is_real_case(c).is_real
    r = identify(c)
    samples = data.draw(arrays(float, (3, n - 1), elements=coef))
    fam = enumerate_family(r, samples)
    for p in fam:
        cc = compose_coefficients(p, r.modulus_alpha, r.modulus_beta, r.nu_anchor, r.mu_anchor)
        assert coefficients_match(c, cc) < 1e-12


@SETTINGS
@given(arrays(float, 2, elements=coef), arrays(float, 2, elements=coef))
def test_proportional_params_rejected(v, lam):
    assume(np.linalg.norm(v) > 0)
    try:
        ActionParams(v, lam[0] * v)
    except InvalidInput:
        return
    raise AssertionError("proportional vectors accepted")


@SETTINGS
@given(st.floats(0.2, 3.0), st.floats(-0.9, 0.9))
def test_free_pair_wronskian_constant(k, x_frac):
    pair = analytic_pair("free", {"k": k}, domain=(-1.0, 1.0))
    v1, d1, v2, d2 = pair.evaluate(np.array([x_frac]))
    np.testing.assert_allclose(d1 * v2 - v1 * d2, k, rtol=1e-13)
    basis = ProductBasis(SeparableSpec((pair,)))
    assert basis.schrodinger_residual(np.array([x_frac])).max() < 1e-12

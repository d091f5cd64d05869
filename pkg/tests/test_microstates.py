import numpy as np
import pytest

from qshje.errors import InvalidInput, NotRepresentable
from qshje.microstates import (COMPLEX_UNIQUE, REAL_FAMILY, CoefficientVector, bohm_diagnostic,
                               coefficients_match, compose_coefficients, enumerate_family, identify,
                               is_real_case)
from qshje.invariance import random_normalized_params
from qshje.product_basis import ActionParams
from qshje.reduced_action import QshjeSolution, grad_s0


class TestCoefficientVector:
    def test_rejects_zero_and_bad_length(self):
        with pytest.raises(InvalidInput):
            CoefficientVector([0.0, 0.0])
        with pytest.raises(InvalidInput):
            CoefficientVector([1.0, 2.0, 3.0])
        with pytest.raises(InvalidInput):
            CoefficientVector([1.0, np.nan])

    def test_pairs_round_trip(self):
        c = CoefficientVector([1.5 + 1j, 3 - 0.3j])
        assert c.to_pairs() == [[1.5, 1.0], [3.0, -0.3]]
        np.testing.assert_array_equal(CoefficientVector.from_pairs(c.to_pairs()).c, c.c)


class TestCompose:
    def test_bohm_ansatz(self):
        c = compose_coefficients(ActionParams([1.0, 0.7], [0.4, 1.0]), 1.0, 0.0).c
        assert c[0].imag == 1.0 and c[-1].real == 1.0

    def test_real_case(self):
        c = compose_coefficients(ActionParams([1.0, 0.7], [0.5, 1.0]), 1.0, 1.0).c
        np.testing.assert_array_equal(c, [1.0, 2.0])

    def test_hand_example(self):
        c = compose_coefficients(ActionParams([1.0, -0.3], [0.5, 1.0]), 2.0, 1.0).c
        np.testing.assert_allclose(c, [1.5 + 1j, 3 - 0.3j], rtol=0, atol=1e-15)

    def test_requires_normalized(self):
        with pytest.raises(InvalidInput):
            compose_coefficients(ActionParams([2.0, 0.0], [0.0, 1.0]), 1.0, 0.0)
        with pytest.raises(InvalidInput):
            compose_coefficients(ActionParams([1.0, 0.0], [0.0, 1.0]), 0.0, 0.0)


class TestIdentify:
    def test_hand_example(self):
        r = identify([1.5 + 1j, 3 - 0.3j])
        assert r.case == COMPLEX_UNIQUE and r.family_dimension == 0
        assert (r.modulus_alpha, r.modulus_beta) == pytest.approx((2.0, 1.0), abs=1e-15)
        np.testing.assert_allclose(r.mu, [0.5, 1.0], atol=1e-15)
        np.testing.assert_allclose(r.nu, [1.0, -0.3], atol=1e-15)

    def test_real_family(self):
        r = identify([1.0, 2.0])
        assert r.case == REAL_FAMILY and r.family_dimension == 1
        assert r.modulus_alpha == r.modulus_beta
        np.testing.assert_allclose(r.mu, [0.5, 1.0])
        assert np.isnan(r.nu[1]) and r.nu_determined.tolist() == [True, False]
        assert r.to_dict()["nu"] == [1.0, None]
        with pytest.raises(InvalidInput):
            r.params()

    def test_real_family_3d(self):
        r = identify(np.arange(1.0, 9.0) * np.exp(0.4j))
        assert r.case == REAL_FAMILY and r.family_dimension == 7
        assert r.theta == pytest.approx(0.4)

    @pytest.mark.parametrize("d", [1, 3])
    def test_round_trip(self, d):
        rng = np.random.default_rng(d)
        for _ in range(200):
            p = random_normalized_params(d, rng)
            a, b = rng.uniform(0.1, 3.0, 2)
            if abs(a - b) < 1e-3:
                continue
            if a < b:
                a, b = b, a
            r = identify(compose_coefficients(p, a, b))
            assert r.case == COMPLEX_UNIQUE
            assert r.modulus_alpha == pytest.approx(a, abs=1e-12)
            assert r.modulus_beta == pytest.approx(b, abs=1e-12)
            np.testing.assert_allclose(r.mu, p.mu, atol=1e-12)
            np.testing.assert_allclose(r.nu, p.nu, atol=1e-12)

    def test_compose_of_identified_reproduces(self):
        r = identify([0.3 + 0.8j, -0.2 + 0.1j, 0.4 - 0.5j, 2.0 + 0.3j])
        c = compose_coefficients(r.params(), r.modulus_alpha, r.modulus_beta).c
        np.testing.assert_allclose(c, [0.3 + 0.8j, -0.2 + 0.1j, 0.4 - 0.5j, 2.0 + 0.3j], atol=1e-12)

    def test_positive_scale_gauge(self):
        c = np.array([1.5 + 1j, 3 - 0.3j])
        r, r2 = identify(c), identify(2.5 * c)
        assert r2.modulus_alpha == pytest.approx(2.5 * r.modulus_alpha)
        assert r2.modulus_beta == pytest.approx(2.5 * r.modulus_beta)
        np.testing.assert_allclose(r2.mu, r.mu, atol=1e-14)
        np.testing.assert_allclose(r2.nu, r.nu, atol=1e-14)

    def test_anchor_retry(self):
        # Im c[0] = 0, so nu cannot be anchored on the first entry
        r = identify([2.0 + 0j, 0.5 + 1j, 0.1 - 0.2j, 3.0 + 0.4j])
        assert r.case == COMPLEX_UNIQUE and r.nu_anchor != 0
        c = compose_coefficients(r.params(), r.modulus_alpha, r.modulus_beta, r.nu_anchor, r.mu_anchor).c
        np.testing.assert_allclose(c, [2.0, 0.5 + 1j, 0.1 - 0.2j, 3.0 + 0.4j], atol=1e-12)

    def test_not_representable(self):
        # no real part reaches the size of any imaginary part with a positive sign
        with pytest.raises(NotRepresentable):
            identify([-1.0 + 5j, -2.0 - 4j])


class TestIsRealCase:
    def test_examples(self):
        r = is_real_case([1j, 2j])
        assert r.is_real and r.theta == pytest.approx(np.pi / 2)
        assert not is_real_case([1.5 + 1j, 3 - 0.3j]).is_real
        r = is_real_case(np.ones(8))
        assert r.is_real and r.theta == 0.0

    def test_near_real_band(self):
        assert is_real_case([1.0, 2.0 + 1e-12j]).is_real
        assert not is_real_case([1.0, 2.0 + 1e-6j]).is_real


class TestFamily:
    def test_1d_three_members(self, free_bases):
        r = identify([1.0, 2.0])
        fam = enumerate_family(r, [[-1.0], [0.0], [1.0]])
        assert [p.nu[1] for p in fam] == [-1.0, 0.0, 1.0]
        cs = [compose_coefficients(p, r.modulus_alpha, r.modulus_beta).c for p in fam]
        for c in cs[1:]:
            assert coefficients_match(cs[0], c) < 1e-12
        g = [grad_s0(QshjeSolution(free_bases[1], p), 0.3) for p in fam]
        assert min(abs(g[0] - g[1]), abs(g[1] - g[2]), abs(g[0] - g[2])) > 1e-6

    def test_3d_distinct_fields(self, free_bases):
        rng = np.random.default_rng(3)
        r = identify(rng.normal(size=8) * np.exp(0.9j))
        fam = enumerate_family(r, rng.normal(size=(5, 7)))
        assert len(fam) == 5
        pts = rng.uniform(0.2, 6.0, (30, 3))
        grads = [grad_s0(QshjeSolution(free_bases[3], p), pts) for p in fam]
        for i in range(5):
            c_i = compose_coefficients(fam[i], r.modulus_alpha, r.modulus_beta, r.nu_anchor, r.mu_anchor)
            assert coefficients_match(r.mu, c_i) < 1e-12
            for j in range(i):
                assert np.max(np.abs(grads[i] - grads[j])) > 1e-6

    def test_proportional_sample_skipped(self):
        r = identify([1.0, 2.0])
        notes = []
        fam = enumerate_family(r, [[2.0], [0.5]], notes)
        assert len(fam) == 1 and len(notes) == 1

    def test_full_length_samples(self):
        r = identify([1.0, 2.0])
        assert enumerate_family(r, [[1.0, 0.3]])[0].nu.tolist() == [1.0, 0.3]
        with pytest.raises(InvalidInput):
            enumerate_family(r, [[2.0, 0.3]])

    def test_needs_real_family(self):
        with pytest.raises(InvalidInput):
            enumerate_family(identify([1.5 + 1j, 3 - 0.3j]), [[0.0]])


class TestBohm:
    def test_compatible(self):
        assert bohm_diagnostic([0.5 + 1j, 1 + 0.2j]).compatible

    def test_incompatible(self):
        assert not bohm_diagnostic([2 + 0.3j, 5 + 1j]).compatible

    def test_composed_two_one(self):
        rng = np.random.default_rng(4)
        for d in (1, 2, 3):
            c = compose_coefficients(random_normalized_params(d, rng), 2.0, 1.0)
            rep = bohm_diagnostic(c)
            assert not rep.compatible and rep.re_c_anchor == 3.0

    def test_composed_one_zero(self):
        rng = np.random.default_rng(5)
        for d in (1, 2, 3):
            c = compose_coefficients(random_normalized_params(d, rng), 1.0, 0.0)
            rep = bohm_diagnostic(c)
            assert rep.compatible and rep.im_c_anchor == 1.0 and rep.re_c_anchor == 1.0

    def test_real_never_compatible(self):
        assert not bohm_diagnostic([1.0, 1.0]).compatible

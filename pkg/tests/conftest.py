import numpy as np
import pytest

from qshje.basis1d import analytic_pair, solve_numerov
from qshje.potentials import PhysicalConstants, Potential1D
from qshje.product_basis import ProductBasis, SeparableSpec

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def constants():
    return PhysicalConstants()


@pytest.fixture(scope="session")
def free_pair(constants):
    return analytic_pair("free", {"k": 1.0}, constants, domain=(0.0, TWO_PI))


@pytest.fixture(scope="session")
def harmonic_potential():
    return Potential1D.harmonic(1.0, (-10.0, 10.0))


@pytest.fixture(scope="session")
def harmonic_pair(harmonic_potential, constants):
    return solve_numerov(harmonic_potential, 0.5, constants, n_nodes=4001)


def free_basis(dimension, k=1.0, domain=(0.0, TWO_PI)):
    ks = np.broadcast_to(np.asarray(k, dtype=float), (dimension,))
    axes = tuple(analytic_pair("free", {"k": float(kk)}, domain=domain) for kk in ks)
    return ProductBasis(SeparableSpec(axes))


@pytest.fixture(scope="session")
def free_bases():
    return {d: free_basis(d) for d in (1, 2, 3)}


@pytest.fixture(scope="session")
def harmonic_basis(harmonic_pair, constants):
    return ProductBasis(SeparableSpec((harmonic_pair,), constants))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])

import os
import subprocess
import sys

import numpy as np
import pytest

from qshje import _pykernels, kernels
from qshje.product_basis import selectors

BACKENDS = kernels.available_backends()
needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled extension not built")


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


def test_numerov_reproduces_sine(backend):
    # beyond ~1000 nodes accumulated rounding, not truncation, dominates
    x = np.linspace(0, np.pi, 1001)
    h = x[1] - x[0]
    y = np.asarray(backend.numerov_sweep(np.full(x.size, -1.0), h, 0.0, np.sin(h)))
    assert np.max(np.abs(y - np.sin(x))) < 1e-11


def test_hermite_exact_for_quintics(backend):
    grid = np.linspace(-1, 2, 7)
    c = np.array([0.3, -1.0, 0.5, 2.0, -0.7, 0.25])
    p = np.polynomial.Polynomial(c)
    dp, d2p = p.deriv(), p.deriv(2)
    x = np.linspace(-1, 2, 53)
    v, d = backend.hermite_eval(grid, p(grid), dp(grid), d2p(grid), x)
    np.testing.assert_allclose(v, p(x), atol=1e-12)
    np.testing.assert_allclose(d, dp(x), atol=1e-11)


def _free_table(n=401):
    grid = np.linspace(0, 2 * np.pi, n)
    s, c = np.sin(grid), np.cos(grid)
    tab = np.array([[s, c, -s, c, -s, -c]])
    return grid[None, :], np.array([n]), tab


def test_rk4_constant_velocity(backend):
    grids, npts, tab = _free_table()
    sel = selectors(1)
    pos, done, status = backend.rk4_tabulated(grids, npts, tab, np.array([1.0, 0.0]), np.array([0.0, 1.0]),
                                              sel, 1.0, np.array([0.0]), np.array([2 * np.pi]),
                                              np.array([0.5]), 1e-2, 100)
    assert status == 0 and done == 100
    assert abs(pos[done, 0] - 1.5) < 1e-10


def test_rk4_reports_exit(backend):
    grids, npts, tab = _free_table()
    pos, done, status = backend.rk4_tabulated(grids, npts, tab, np.array([1.0, 0.0]), np.array([0.0, 1.0]),
                                              selectors(1), 1.0, np.array([0.0]), np.array([2 * np.pi]),
                                              np.array([6.0]), 0.1, 100)
    assert status == 1 and done == 2


@needs_compiled
def test_backends_agree():
    c, p = BACKENDS["compiled"], _pykernels
    rng = np.random.default_rng(5)
    f = rng.uniform(-2, 1, 500)
    np.testing.assert_allclose(c.numerov_sweep(f, 0.01, 0.1, 0.2), p.numerov_sweep(f, 0.01, 0.1, 0.2),
                               rtol=1e-13)
    grid = np.linspace(0, 1, 50)
    y, dy, d2y = rng.normal(size=(3, 50))
    x = rng.uniform(0, 1, 300)
    for a, b in zip(c.hermite_eval(grid, y, dy, d2y, x), p.hermite_eval(grid, y, dy, d2y, x)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)
    grids, npts, tab = _free_table()
    args = (grids, npts, tab, np.array([1.0, 0.3]), np.array([-0.2, 1.0]), selectors(1), 1.0,
            np.array([0.0]), np.array([2 * np.pi]), np.array([1.0]), 1e-2, 200)
    pc, dc, sc = c.rk4_tabulated(*args)
    pp, dp_, sp = p.rk4_tabulated(*args)
    assert (dc, sc) == (dp_, sp)
    np.testing.assert_allclose(np.asarray(pc)[: dc + 1], pp[: dp_ + 1], rtol=1e-13)


def test_env_var_forces_python_backend():
    env = dict(os.environ, QSHJE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import qshje.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"

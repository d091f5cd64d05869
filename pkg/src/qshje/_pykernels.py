"""Pure-Python reference implementations of the hot kernels.

These mirror ``_ckernels.pyx`` line for line and are used when the compiled
extension is unavailable or disabled with ``QSHJE_PURE_PYTHON=1``.
"""

import numpy as np


def numerov_sweep(f, h, psi0, psi1):
    """Run the Numerov recurrence for ``psi'' = f psi`` on a uniform grid.

    Parameters
    ----------
    f : ndarray
        Coefficient ``2m(V - E)/hbar**2`` sampled at the nodes, in sweep order.
    h : float
        Signed step between consecutive nodes.
    psi0, psi1 : float
        Values at the first two nodes.

    Returns
    -------
    ndarray
        Values at every node.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    out = np.empty(n)
    out[0] = psi0
    out[1] = psi1
    c = h * h / 12.0
    for i in range(1, n - 1):
        out[i + 1] = (
            2.0 * (1.0 + 5.0 * c * f[i]) * out[i] - (1.0 - c * f[i - 1]) * out[i - 1]
        ) / (1.0 - c * f[i + 1])
    return out


def _locate(grid, x):
    n = grid.shape[0]
    lo, hi = 0, n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if grid[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


def hermite_eval(grid, y, dy, d2y, x):
    """Quintic Hermite interpolation of value and first derivative.

    Each cell is the unique quintic matching value, first and second
    derivative at both ends, so the interpolant is C2 and exact at nodes.
    """
    grid = np.asarray(grid, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    val = np.empty(x.shape[0])
    der = np.empty(x.shape[0])
    for k in range(x.shape[0]):
        i = _locate(grid, x[k])
        h = grid[i + 1] - grid[i]
        t = (x[k] - grid[i]) / h
        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        t5 = t4 * t
        h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
        h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
        h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5)
        h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
        h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
        h5 = 0.5 * (t3 - 2.0 * t4 + t5)
        g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4
        g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4
        g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4)
        g3 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4
        g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4
        g5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4)
        a0, a1 = y[i], y[i + 1]
        b0, b1 = h * dy[i], h * dy[i + 1]
        c0, c1 = h * h * d2y[i], h * h * d2y[i + 1]
        val[k] = a0 * h0 + b0 * h1 + c0 * h2 + a1 * h3 + b1 * h4 + c1 * h5
        der[k] = (a0 * g0 + b0 * g1 + c0 * g2 + a1 * g3 + b1 * g4 + c1 * g5) / h
    return val, der


def _axis_eval(grid, y, dy, d2y, n, x):
    i = _locate(grid[:n], x)
    h = grid[i + 1] - grid[i]
    t = (x - grid[i]) / h
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
    h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
    h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5)
    h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
    h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
    h5 = 0.5 * (t3 - 2.0 * t4 + t5)
    g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4
    g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4
    g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4)
    g3 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4
    g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4
    g5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4)
    a0, a1 = y[i], y[i + 1]
    b0, b1 = h * dy[i], h * dy[i + 1]
    c0, c1 = h * h * d2y[i], h * h * d2y[i + 1]
    v = a0 * h0 + b0 * h1 + c0 * h2 + a1 * h3 + b1 * h4 + c1 * h5
    d = (a0 * g0 + b0 * g1 + c0 * g2 + a1 * g3 + b1 * g4 + c1 * g5) / h
    return v, d


def _tabulated_velocity(x, grids, npts, tab, nu, mu, sel, hbar_over_m, out):
    dim = x.shape[0]
    fv = np.empty((dim, 2))
    fd = np.empty((dim, 2))
    for a in range(dim):
        for s in range(2):
            fv[a, s], fd[a, s] = _axis_eval(
                grids[a], tab[a, 3 * s], tab[a, 3 * s + 1], tab[a, 3 * s + 2], npts[a], x[a]
            )
    p1 = 0.0
    p2 = 0.0
    g1 = np.zeros(dim)
    g2 = np.zeros(dim)
    for i in range(sel.shape[0]):
        prod = 1.0
        for a in range(dim):
            prod *= fv[a, sel[i, a]]
        p1 += nu[i] * prod
        p2 += mu[i] * prod
        for b in range(dim):
            gp = fd[b, sel[i, b]]
            for a in range(dim):
                if a != b:
                    gp *= fv[a, sel[i, a]]
            g1[b] += nu[i] * gp
            g2[b] += mu[i] * gp
    den = p1 * p1 + p2 * p2
    if den == 0.0:
        return False
    for b in range(dim):
        out[b] = hbar_over_m * (p2 * g1[b] - p1 * g2[b]) / den
    return True


def rk4_tabulated(grids, npts, tab, nu, mu, sel, hbar_over_m, lo, hi, x0, dt, nsteps):
    """Fixed-step RK4 for ``dx/dt = grad S0 / m`` on a tabulated product basis.

    Parameters
    ----------
    grids : ndarray, shape (d, nmax)
        Per-axis node arrays, padded to a common length.
    npts : ndarray of int, shape (d,)
        Number of valid nodes per axis.
    tab : ndarray, shape (d, 6, nmax)
        Per axis: value, derivative and second derivative of the first then
        the second basis solution.
    nu, mu : ndarray, shape (2**d,)
        Combination coefficients.
    sel : ndarray of int, shape (2**d, d)
        Factor selector (0 or 1) for every product solution and axis.
    hbar_over_m : float
    lo, hi : ndarray, shape (d,)
        Box bounds; a stage point outside them stops the integration.
    x0 : ndarray, shape (d,)
    dt : float
    nsteps : int

    Returns
    -------
    positions : ndarray, shape (nsteps + 1, d)
        Rows past ``done`` are unset.
    done : int
        Number of completed steps.
    status : int
        0 finished, 1 a stage left the box, 2 the phase was undefined.
    """
    dim = x0.shape[0]
    pos = np.empty((nsteps + 1, dim))
    pos[0] = x0
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    y = np.empty(dim)

    def inside(p):
        for a in range(dim):
            if p[a] < lo[a] or p[a] > hi[a]:
                return False
        return True

    x = np.array(x0, dtype=float)
    for n in range(nsteps):
        if not _tabulated_velocity(x, grids, npts, tab, nu, mu, sel, hbar_over_m, k1):
            return pos, n, 2
        y[:] = x + 0.5 * dt * k1
        if not inside(y):
            return pos, n, 1
        if not _tabulated_velocity(y, grids, npts, tab, nu, mu, sel, hbar_over_m, k2):
            return pos, n, 2
        y[:] = x + 0.5 * dt * k2
        if not inside(y):
            return pos, n, 1
        if not _tabulated_velocity(y, grids, npts, tab, nu, mu, sel, hbar_over_m, k3):
            return pos, n, 2
        y[:] = x + dt * k3
        if not inside(y):
            return pos, n, 1
        if not _tabulated_velocity(y, grids, npts, tab, nu, mu, sel, hbar_over_m, k4):
            return pos, n, 2
        y[:] = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not inside(y):
            return pos, n, 1
        x[:] = y
        pos[n + 1] = x
    return pos, nsteps, 0

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Numerov sweep, quintic Hermite evaluation, tabulated RK4.

Semantics match ``_pykernels`` exactly; see that module for the documentation.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def numerov_sweep(double[::1] f, double h, double psi0, double psi1):
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t i
    cdef double c = h * h / 12.0
    out = np.empty(n)
    cdef double[::1] o = out
    o[0] = psi0
    o[1] = psi1
    for i in range(1, n - 1):
        o[i + 1] = (
            2.0 * (1.0 + 5.0 * c * f[i]) * o[i] - (1.0 - c * f[i - 1]) * o[i - 1]
        ) / (1.0 - c * f[i + 1])
    return out


cdef inline Py_ssize_t _locate(const double[::1] grid, Py_ssize_t n, double x) nogil:
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = n - 1
    cdef Py_ssize_t mid
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if grid[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


cdef inline void _quintic(const double[::1] grid, const double[::1] y,
                          const double[::1] dy, const double[::1] d2y,
                          Py_ssize_t n, double x, double* v, double* d) nogil:
    cdef Py_ssize_t i = _locate(grid, n, x)
    cdef double h = grid[i + 1] - grid[i]
    cdef double t = (x - grid[i]) / h
    cdef double t2 = t * t
    cdef double t3 = t2 * t
    cdef double t4 = t3 * t
    cdef double t5 = t4 * t
    cdef double a0 = y[i], a1 = y[i + 1]
    cdef double b0 = h * dy[i], b1 = h * dy[i + 1]
    cdef double c0 = h * h * d2y[i], c1 = h * h * d2y[i + 1]
    v[0] = (a0 * (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5)
            + b0 * (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5)
            + c0 * 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5)
            + a1 * (10.0 * t3 - 15.0 * t4 + 6.0 * t5)
            + b1 * (-4.0 * t3 + 7.0 * t4 - 3.0 * t5)
            + c1 * 0.5 * (t3 - 2.0 * t4 + t5))
    d[0] = (a0 * (-30.0 * t2 + 60.0 * t3 - 30.0 * t4)
            + b0 * (1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4)
            + c0 * 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4)
            + a1 * (30.0 * t2 - 60.0 * t3 + 30.0 * t4)
            + b1 * (-12.0 * t2 + 28.0 * t3 - 15.0 * t4)
            + c1 * 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4)) / h


def hermite_eval(const double[::1] grid, const double[::1] y, const double[::1] dy,
                 const double[::1] d2y, x):
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    cdef const double[::1] xv = xs
    cdef Py_ssize_t m = xv.shape[0]
    cdef Py_ssize_t n = grid.shape[0]
    cdef Py_ssize_t k
    val = np.empty(m)
    der = np.empty(m)
    cdef double[::1] vv = val
    cdef double[::1] dd = der
    with nogil:
        for k in range(m):
            _quintic(grid, y, dy, d2y, n, xv[k], &vv[k], &dd[k])
    return val, der


cdef bint _velocity(const double[::1] x, const double[:, ::1] grids, const long[::1] npts,
                    const double[:, :, ::1] tab, const double[::1] nu, const double[::1] mu,
                    const long[:, ::1] sel, double hbar_over_m,
                    double[:, ::1] fv, double[:, ::1] fd,
                    double[::1] g1, double[::1] g2, double[::1] out) nogil:
    cdef Py_ssize_t dim = x.shape[0]
    cdef Py_ssize_t a, b, s, i
    cdef double p1 = 0.0, p2 = 0.0, prod, gp, den
    for a in range(dim):
        for s in range(2):
            _quintic(grids[a], tab[a, 3 * s], tab[a, 3 * s + 1], tab[a, 3 * s + 2],
                     npts[a], x[a], &fv[a, s], &fd[a, s])
        g1[a] = 0.0
        g2[a] = 0.0
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


cdef inline bint _inside(const double[::1] p, const double[::1] lo, const double[::1] hi) nogil:
    cdef Py_ssize_t a
    for a in range(p.shape[0]):
        if p[a] < lo[a] or p[a] > hi[a]:
            return False
    return True


def rk4_tabulated(grids, npts, tab, nu, mu, sel, double hbar_over_m, lo, hi, x0,
                  double dt, Py_ssize_t nsteps):
    cdef const double[:, ::1] g = np.ascontiguousarray(grids, dtype=float)
    cdef const long[::1] np_ = np.ascontiguousarray(npts, dtype=np.int_)
    cdef const double[:, :, ::1] tb = np.ascontiguousarray(tab, dtype=float)
    cdef const double[::1] nuv = np.ascontiguousarray(nu, dtype=float)
    cdef const double[::1] muv = np.ascontiguousarray(mu, dtype=float)
    cdef const long[:, ::1] sv = np.ascontiguousarray(sel, dtype=np.int_)
    cdef const double[::1] lov = np.ascontiguousarray(lo, dtype=float)
    cdef const double[::1] hiv = np.ascontiguousarray(hi, dtype=float)
    cdef Py_ssize_t dim = len(x0)
    pos = np.empty((nsteps + 1, dim))
    cdef double[:, ::1] pv = pos
    cdef double[::1] x = np.array(x0, dtype=float)
    cdef double[::1] y = np.empty(dim)
    cdef double[::1] k1 = np.empty(dim)
    cdef double[::1] k2 = np.empty(dim)
    cdef double[::1] k3 = np.empty(dim)
    cdef double[::1] k4 = np.empty(dim)
    cdef double[::1] g1 = np.empty(dim)
    cdef double[::1] g2 = np.empty(dim)
    cdef double[:, ::1] fv = np.empty((dim, 2))
    cdef double[:, ::1] fd = np.empty((dim, 2))
    cdef Py_ssize_t n, a
    cdef int status = 0
    cdef Py_ssize_t done = nsteps
    for a in range(dim):
        pv[0, a] = x[a]
    with nogil:
        for n in range(nsteps):
            if not _velocity(x, g, np_, tb, nuv, muv, sv, hbar_over_m, fv, fd, g1, g2, k1):
                status = 2
                done = n
                break
            for a in range(dim):
                y[a] = x[a] + 0.5 * dt * k1[a]
            if not _inside(y, lov, hiv):
                status = 1
                done = n
                break
            if not _velocity(y, g, np_, tb, nuv, muv, sv, hbar_over_m, fv, fd, g1, g2, k2):
                status = 2
                done = n
                break
            for a in range(dim):
                y[a] = x[a] + 0.5 * dt * k2[a]
            if not _inside(y, lov, hiv):
                status = 1
                done = n
                break
            if not _velocity(y, g, np_, tb, nuv, muv, sv, hbar_over_m, fv, fd, g1, g2, k3):
                status = 2
                done = n
                break
            for a in range(dim):
                y[a] = x[a] + dt * k3[a]
            if not _inside(y, lov, hiv):
                status = 1
                done = n
                break
            if not _velocity(y, g, np_, tb, nuv, muv, sv, hbar_over_m, fv, fd, g1, g2, k4):
                status = 2
                done = n
                break
            for a in range(dim):
                y[a] = x[a] + dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])
            if not _inside(y, lov, hiv):
                status = 1
                done = n
                break
            for a in range(dim):
                x[a] = y[a]
                pv[n + 1, a] = y[a]
    return pos, done, status

# cython: language_level=3
"""Compiled kernels.

Same functions and same floating-point operation order as
``_kernels_py``; loops run without the GIL so replications can share
threads.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double VAR_TOL = 1e-12


def compensated_cumsum(values):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s = 0.0, c = 0.0, x, tt
    with nogil:
        for i in range(n):
            x = v[i]
            tt = s + x
            if fabs(s) >= fabs(x):
                c += (s - tt) + x
            else:
                c += (x - tt) + s
            s = tt
            out[i] = s + c
    return out_arr


cdef void _waterfill(double* p, int* fixed, Py_ssize_t K, double p_floor) noexcept nogil:
    cdef Py_ssize_t k, n_fixed = 0
    cdef bint changed
    cdef double free_mass, tot
    for k in range(K):
        fixed[k] = 0
    while True:
        changed = False
        for k in range(K):
            if not fixed[k] and p[k] < p_floor:
                fixed[k] = 1
                p[k] = p_floor
                n_fixed += 1
                changed = True
        if not changed:
            return
        free_mass = 1.0 - n_fixed * p_floor
        tot = 0.0
        for k in range(K):
            if not fixed[k]:
                tot += p[k]
        for k in range(K):
            if not fixed[k]:
                p[k] = p[k] * free_mass / tot


cdef void _mean_proportional(double* sums, long* counts, double* p, int* fixed,
                             Py_ssize_t K, double p_floor, double mean_floor) noexcept nogil:
    cdef Py_ssize_t k
    cdef double scale, total, v
    for k in range(K):
        p[k] = sums[k] / counts[k] if counts[k] > 0 else 0.0
    if mean_floor < 0.0:
        scale = 1.0
        for k in range(K):
            if fabs(p[k]) > scale:
                scale = fabs(p[k])
        mean_floor = 0.05 * scale
    for k in range(K):
        if not (p[k] > mean_floor):
            p[k] = mean_floor
    total = 0.0
    for k in range(K):
        total += p[k]
    for k in range(K):
        p[k] = p[k] / total
    _waterfill(p, fixed, K, p_floor)


def policy_path(potentials, uniforms, long n_explore, double p_floor, double mean_floor, int kind):
    cdef double[:, ::1] pot = np.ascontiguousarray(potentials, dtype=np.float64)
    cdef double[::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t n = pot.shape[0], K = pot.shape[1], i, k, a
    actions_arr = np.empty(n, dtype=np.int64)
    probs_arr = np.empty((n, K), dtype=np.float64)
    cdef cnp.int64_t[::1] actions = actions_arr
    cdef double[:, ::1] probs = probs_arr
    cdef double* sums = <double*> malloc(K * sizeof(double))
    cdef long* counts = <long*> malloc(K * sizeof(long))
    cdef double* p = <double*> malloc(K * sizeof(double))
    cdef int* fixed = <int*> malloc(K * sizeof(int))
    cdef double c, y
    if sums == NULL or counts == NULL or p == NULL or fixed == NULL:
        free(sums); free(counts); free(p); free(fixed)
        raise MemoryError()
    try:
        with nogil:
            for k in range(K):
                sums[k] = 0.0
                counts[k] = 0
            for i in range(n):
                if kind == 0 or i + 1 <= n_explore:
                    for k in range(K):
                        p[k] = 1.0 / K
                else:
                    _mean_proportional(sums, counts, p, fixed, K, p_floor, mean_floor)
                a = K - 1
                c = 0.0
                for k in range(K):
                    c += p[k]
                    if u[i] < c:
                        a = k
                        break
                y = pot[i, a]
                sums[a] += y
                counts[a] += 1
                actions[i] = a
                for k in range(K):
                    probs[i, k] = p[k]
    finally:
        free(sums); free(counts); free(p); free(fixed)
    return actions_arr, probs_arr


def ar1_filter(innovations, double rho):
    cdef double[::1] e = np.ascontiguousarray(innovations, dtype=np.float64)
    cdef Py_ssize_t n = e.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double prev = 0.0
    with nogil:
        for i in range(n):
            prev = rho * prev + e[i]
            out[i] = prev
    return out_arr


cdef inline double _predict(long n, double mx, double my, double cxx, double cxy,
                            double bound, double xi) noexcept nogil:
    cdef double var, pred
    if n == 0:
        return 0.0
    var = cxx / n
    pred = my
    if var > VAR_TOL * (1.0 + var):
        pred = my + (cxy / cxx) * (xi - mx)
    if pred > bound:
        return bound
    if pred < -bound:
        return -bound
    return pred


def ls_predictions(x, y, double clamp_mult):
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] ys = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t m = xs.shape[0], i
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef long n = 0
    cdef double mx = 0.0, my = 0.0, cxx = 0.0, cxy = 0.0, ymax = 0.0, xi, yi, dx
    with nogil:
        for i in range(m):
            xi = xs[i]
            out[i] = _predict(n, mx, my, cxx, cxy, ymax * clamp_mult, xi)
            yi = ys[i]
            n += 1
            dx = xi - mx
            mx += dx / n
            my += (yi - my) / n
            cxx += dx * (xi - mx)
            cxy += dx * (yi - my)
            if fabs(yi) > ymax:
                ymax = fabs(yi)
    return out_arr

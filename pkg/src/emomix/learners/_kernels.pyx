# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled solver kernels.

Mirror of ``_kernels_py.py``: same signatures, same update order, same
tie-breaking, so either backend satisfies the same contracts.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

cdef double _TAU = 1e-12


def enet_coordinate_descent(double[:, ::1] X, double[::1] y,
                            double alpha_l1, double alpha_l2,
                            double[::1] w, int max_sweeps, double tol):
    """Cyclic coordinate descent on pre-centered data; updates w in place."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t m = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] col_nsq_arr = np.zeros(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_arr = np.zeros(n)
    cdef double[::1] col_nsq = col_nsq_arr
    cdef double[::1] r = r_arr
    cdef Py_ssize_t i, j, sweeps
    cdef double acc, cj, wj, rho, wn, delta, max_delta
    cdef bint converged = False

    with nogil:
        for j in range(m):
            acc = 0.0
            for i in range(n):
                acc += X[i, j] * X[i, j]
            col_nsq[j] = acc / n
        for i in range(n):
            acc = y[i]
            for j in range(m):
                acc -= X[i, j] * w[j]
            r[i] = acc

    sweeps = 0
    max_delta = np.inf
    with nogil:
        for sweeps in range(1, max_sweeps + 1):
            max_delta = 0.0
            for j in range(m):
                cj = col_nsq[j]
                wj = w[j]
                if cj <= 0.0:
                    if wj != 0.0:
                        for i in range(n):
                            r[i] += X[i, j] * wj
                        w[j] = 0.0
                        delta = wj if wj > 0.0 else -wj
                        if delta > max_delta:
                            max_delta = delta
                    continue
                acc = 0.0
                for i in range(n):
                    acc += X[i, j] * r[i]
                rho = acc / n + cj * wj
                if rho > alpha_l1:
                    wn = (rho - alpha_l1) / (cj + alpha_l2)
                elif rho < -alpha_l1:
                    wn = (rho + alpha_l1) / (cj + alpha_l2)
                else:
                    wn = 0.0
                if wn != wj:
                    for i in range(n):
                        r[i] += X[i, j] * (wj - wn)
                    w[j] = wn
                    delta = wn - wj
                    if delta < 0.0:
                        delta = -delta
                    if delta > max_delta:
                        max_delta = delta
            if max_delta < tol:
                converged = True
                break

    return int(sweeps), float(max_delta), bool(converged)


def svr_smo(double[:, ::1] K, double[::1] y, double C, double epsilon,
            double tol, long max_iter):
    """Maximal-violating-pair SMO for the epsilon-SVR dual."""
    cdef Py_ssize_t n = y.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_arr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s_arr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f_arr = np.zeros(n)
    cdef double[::1] a = a_arr
    cdef double[::1] a_star = s_arr
    cdef double[::1] f = f_arr

    cdef long it = 0
    cdef bint converged = False
    cdef Py_ssize_t i, up_t, low_t, i_s, j_s
    cdef double up_val, low_val, v
    cdef double i_z, j_z, gi, gj, ti_old, tj_old, ti, tj
    cdef double kii, kjj, kij, quad, delta, diff, total, dbi, dbj

    with nogil:
        while it < max_iter:
            # alpha block first, then alpha*; strict comparisons keep the
            # earliest candidate on ties (same order as the numpy twin).
            up_t = -1
            up_val = 0.0
            for i in range(n):
                if a[i] < C:
                    v = y[i] - f[i] - epsilon
                    if up_t < 0 or v > up_val:
                        up_val = v
                        up_t = i
            for i in range(n):
                if a_star[i] > 0.0:
                    v = y[i] - f[i] + epsilon
                    if up_t < 0 or v > up_val:
                        up_val = v
                        up_t = n + i

            low_t = -1
            low_val = 0.0
            for i in range(n):
                if a[i] > 0.0:
                    v = y[i] - f[i] - epsilon
                    if low_t < 0 or v < low_val:
                        low_val = v
                        low_t = i
            for i in range(n):
                if a_star[i] < C:
                    v = y[i] - f[i] + epsilon
                    if low_t < 0 or v < low_val:
                        low_val = v
                        low_t = n + i

            if up_t < 0 or low_t < 0 or up_val - low_val < tol:
                converged = True
                break

            it += 1
            if up_t < n:
                i_s = up_t
                i_z = 1.0
            else:
                i_s = up_t - n
                i_z = -1.0
            if low_t < n:
                j_s = low_t
                j_z = 1.0
            else:
                j_s = low_t - n
                j_z = -1.0
            gi = -i_z * up_val
            gj = -j_z * low_val
            ti_old = a[i_s] if i_z > 0 else a_star[i_s]
            tj_old = a[j_s] if j_z > 0 else a_star[j_s]
            kii = K[i_s, i_s]
            kjj = K[j_s, j_s]
            kij = K[i_s, j_s]

            if i_z != j_z:
                quad = kii + kjj + 2.0 * (i_z * j_z * kij)
                if quad <= 0.0:
                    quad = _TAU
                delta = (-gi - gj) / quad
                diff = ti_old - tj_old
                ti = ti_old + delta
                tj = tj_old + delta
                if diff > 0.0:
                    if tj < 0.0:
                        tj = 0.0
                        ti = diff
                else:
                    if ti < 0.0:
                        ti = 0.0
                        tj = -diff
                if diff > 0.0:
                    if ti > C:
                        ti = C
                        tj = C - diff
                else:
                    if tj > C:
                        tj = C
                        ti = C + diff
            else:
                quad = kii + kjj - 2.0 * (i_z * j_z * kij)
                if quad <= 0.0:
                    quad = _TAU
                delta = (gi - gj) / quad
                total = ti_old + tj_old
                ti = ti_old - delta
                tj = tj_old + delta
                if total > C:
                    if ti > C:
                        ti = C
                        tj = total - C
                else:
                    if tj < 0.0:
                        tj = 0.0
                        ti = total
                if total > C:
                    if tj > C:
                        tj = C
                        ti = total - C
                else:
                    if ti < 0.0:
                        ti = 0.0
                        tj = total

            if i_z > 0:
                a[i_s] = ti
            else:
                a_star[i_s] = ti
            if j_z > 0:
                a[j_s] = tj
            else:
                a_star[j_s] = tj

            dbi = i_z * (ti - ti_old)
            dbj = j_z * (tj - tj_old)
            if dbi != 0.0:
                for i in range(n):
                    f[i] += dbi * K[i, i_s]
            if dbj != 0.0:
                for i in range(n):
                    f[i] += dbj * K[i, j_s]

    return a_arr, s_arr, f_arr, int(it), bool(converged)

"""Pure-numpy solver kernels.

Fallback twin of the compiled extension in ``_kernels.pyx``; same
signatures, same algorithms, same tie-breaking.  Selected at import time by
:mod:`emomix.learners._backend` when the extension is unavailable.
"""

import numpy as np

BACKEND = "python"

_TAU = 1e-12


def enet_coordinate_descent(X, y, alpha_l1, alpha_l2, w, max_sweeps, tol):
    """Cyclic coordinate descent for the elastic-net objective.

    Minimizes (1/2n)||y - Xw||^2 + alpha_l1*||w||_1 + (alpha_l2/2)*||w||^2
    on pre-centered data, updating ``w`` in place.  Returns
    (sweeps_run, last_max_delta, converged).
    """
    n, m = X.shape
    col_nsq = (X * X).sum(axis=0) / n
    r = y - X @ w

    sweeps = 0
    max_delta = np.inf
    for sweeps in range(1, max_sweeps + 1):
        max_delta = 0.0
        for j in range(m):
            cj = col_nsq[j]
            wj = w[j]
            if cj <= 0.0:
                if wj != 0.0:
                    r += X[:, j] * wj
                    w[j] = 0.0
                    max_delta = max(max_delta, abs(wj))
                continue
            rho = (X[:, j] @ r) / n + cj * wj
            if rho > alpha_l1:
                wn = (rho - alpha_l1) / (cj + alpha_l2)
            elif rho < -alpha_l1:
                wn = (rho + alpha_l1) / (cj + alpha_l2)
            else:
                wn = 0.0
            if wn != wj:
                r += X[:, j] * (wj - wn)
                w[j] = wn
                delta = abs(wn - wj)
                if delta > max_delta:
                    max_delta = delta
        if max_delta < tol:
            return sweeps, max_delta, True
    return sweeps, max_delta, False


def svr_smo(K, y, C, epsilon, tol, max_iter):
    """SMO solver for the epsilon-insensitive SVR dual.

    Minimizes (1/2) b'Kb + epsilon*sum(a + a*) - y'b over a, a* in [0, C]^n
    with sum(b) = 0, where b = a - a*.  Working pairs are chosen by the
    maximal-violating-pair rule; iteration stops when the KKT violation
    m - M drops below ``tol``.  Returns (a, a_star, f, iterations, converged)
    with f = K @ b.
    """
    n = y.shape[0]
    a = np.zeros(n)
    a_star = np.zeros(n)
    f = np.zeros(n)

    it = 0
    converged = False
    while it < max_iter:
        # -z*G values: (y - f) - eps on the alpha side, (y - f) + eps on the
        # alpha* side; eligibility follows the box state of each variable.
        # Ties break toward the alpha block, then the lower index.
        neg_zg_a = y - f - epsilon
        neg_zg_s = y - f + epsilon

        va = np.where(a < C, neg_zg_a, -np.inf)
        vs = np.where(a_star > 0.0, neg_zg_s, -np.inf)
        ia = int(np.argmax(va))
        is_ = int(np.argmax(vs))
        if va[ia] >= vs[is_]:
            up_t, up_val = ia, va[ia]
        else:
            up_t, up_val = n + is_, vs[is_]

        wa = np.where(a > 0.0, neg_zg_a, np.inf)
        ws = np.where(a_star < C, neg_zg_s, np.inf)
        ja = int(np.argmin(wa))
        js = int(np.argmin(ws))
        if wa[ja] <= ws[js]:
            low_t, low_val = ja, wa[ja]
        else:
            low_t, low_val = n + js, ws[js]

        if not np.isfinite(up_val) or not np.isfinite(low_val) or up_val - low_val < tol:
            converged = True
            break

        it += 1
        i_s, i_z = (up_t, 1.0) if up_t < n else (up_t - n, -1.0)
        j_s, j_z = (low_t, 1.0) if low_t < n else (low_t - n, -1.0)
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
            f += dbi * K[:, i_s]
        if dbj != 0.0:
            f += dbj * K[:, j_s]

    return a, a_star, f, it, converged

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of py_kernel.solve_ascent.

Same math, same schedule, same keep-best rule: trust-region Newton steps
on the soft-min surrogate, with the Hessian assembled from per-pair
rank-1 blocks and factored by a small dense Cholesky. Problem sizes are
tiny (U, K, r <= a few tens) so everything stays in L1 and the win over
numpy is call overhead, not vector width.
"""
import numpy as np

cimport cython
from libc.math cimport exp, log, sqrt


cdef inline double _cre(double complex z) nogil:
    return z.real


cdef void _matmul(double complex[:, ::1] m, double complex[:, ::1] y,
                  double complex[:, ::1] out) nogil:
    cdef Py_ssize_t u = m.shape[0], r = m.shape[1], k = y.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double complex acc
    for i in range(u):
        for j in range(k):
            acc = 0
            for t in range(r):
                acc = acc + m[i, t] * y[t, j]
            out[i, j] = acc


cdef void _pair_values(int[:] pk, int[:] pe, double[:] cst, double[:] l1,
                       double complex[:] alpha, double[:] q1, double[:] q2a,
                       double[:] q2b, double[:] l2, double complex[:, ::1] ret,
                       double complex[:, ::1] r_mat, double[:] g) nogil:
    cdef Py_ssize_t p, j, n_pairs = pk.shape[0], k_cols = r_mat.shape[1]
    cdef Py_ssize_t kk, ee
    cdef double sum_k, sum_e, lin2, ek, val
    cdef double complex z
    for p in range(n_pairs):
        kk = pk[p]
        sum_k = 0
        for j in range(k_cols):
            z = r_mat[kk, j]
            sum_k += z.real * z.real + z.imag * z.imag
        z = r_mat[kk, kk]
        val = cst[p] + l1[p] * _cre(alpha[p].conjugate() * z) - q1[p] * sum_k
        ee = pe[p]
        if ee >= 0:
            sum_e = 0
            lin2 = 0
            for j in range(k_cols):
                z = r_mat[ee, j]
                sum_e += z.real * z.real + z.imag * z.imag
                lin2 += _cre(ret[p, j].conjugate() * z)
            z = r_mat[ee, kk]
            ek = z.real * z.real + z.imag * z.imag
            val += -q2a[p] * sum_e + l2[p] * lin2 - q2b[p] * (sum_e - ek)
        g[p] = val


cdef double _softmin(double[:] g, double tau, double[:] lam) nogil:
    cdef Py_ssize_t p, n = g.shape[0]
    cdef double gmin = g[0], s = 0
    for p in range(1, n):
        if g[p] < gmin:
            gmin = g[p]
    for p in range(n):
        lam[p] = exp(-(g[p] - gmin) / tau)
        s += lam[p]
    for p in range(n):
        lam[p] /= s
    return gmin - tau * log(s)


cdef double _min_of(double[:] g) nogil:
    cdef Py_ssize_t p
    cdef double gmin = g[0]
    for p in range(1, g.shape[0]):
        if g[p] < gmin:
            gmin = g[p]
    return gmin


cdef void _pair_grad_vs(double complex[:, ::1] m, int[:] pk, int[:] pe,
                        double[:] l1, double complex[:] alpha, double[:] q1,
                        double[:] q2a, double[:] q2b, double[:] l2,
                        double complex[:, ::1] ret,
                        double complex[:, ::1] r_mat,
                        double[:, ::1] vs) nogil:
    """Packed per-pair gradients: vs[p, 2r j + i] = Re G_p[i, j],
    vs[p, 2r j + r + i] = Im G_p[i, j]."""
    cdef Py_ssize_t r = m.shape[1], k_cols = r_mat.shape[1]
    cdef Py_ssize_t p, i, j, kk, ee, n_pairs = pk.shape[0]
    cdef double complex cv, gk, ge
    for p in range(n_pairs):
        kk = pk[p]
        ee = pe[p]
        for j in range(k_cols):
            cv = -2.0 * q1[p] * r_mat[kk, j]
            if j == kk:
                cv = cv + l1[p] * alpha[p]
            for i in range(r):
                gk = m[kk, i].conjugate() * cv
                vs[p, 2 * r * j + i] = gk.real
                vs[p, 2 * r * j + r + i] = gk.imag
        if ee >= 0:
            for j in range(k_cols):
                cv = (-2.0 * (q2a[p] + q2b[p]) * r_mat[ee, j]
                      + l2[p] * ret[p, j])
                if j == kk:
                    cv = cv + 2.0 * q2b[p] * r_mat[ee, kk]
                for i in range(r):
                    ge = m[ee, i].conjugate() * cv
                    vs[p, 2 * r * j + i] += ge.real
                    vs[p, 2 * r * j + r + i] += ge.imag


cdef void _hessian(double complex[:, ::1] m, int[:] pk, int[:] pe,
                   double[:] q1, double[:] q2a, double[:] q2b,
                   double[:] lam, double tau, double[:, ::1] vs,
                   double complex[:, ::1] base, double complex[:, ::1] blk,
                   double[:] vbar, double[:, ::1] hess) nogil:
    """Real-packed Hessian of softmin at the current point; also fills
    vbar with the packed gradient (= lam @ vs)."""
    cdef Py_ssize_t r = m.shape[1], n = hess.shape[0]
    cdef Py_ssize_t k_cols = n / (2 * r)
    cdef Py_ssize_t p, i, j, a, b, kk, ee, n_pairs = pk.shape[0]
    cdef double wgt, inv_tau = 1.0 / tau
    cdef double complex z

    for a in range(n):
        vbar[a] = 0
        for b in range(n):
            hess[a, b] = 0

    for a in range(r):
        for b in range(r):
            base[a, b] = 0
    for p in range(n_pairs):
        kk = pk[p]
        wgt = lam[p] * q1[p]
        for a in range(r):
            for b in range(r):
                base[a, b] = base[a, b] \
                    + wgt * m[kk, a].conjugate() * m[kk, b]
        ee = pe[p]
        if ee >= 0:
            wgt = lam[p] * (q2a[p] + q2b[p])
            for a in range(r):
                for b in range(r):
                    base[a, b] = base[a, b] \
                        + wgt * m[ee, a].conjugate() * m[ee, b]

    for j in range(k_cols):
        for a in range(r):
            for b in range(r):
                blk[a, b] = base[a, b]
        for p in range(n_pairs):
            if pk[p] == j and pe[p] >= 0:
                ee = pe[p]
                wgt = lam[p] * q2b[p]
                for a in range(r):
                    for b in range(r):
                        blk[a, b] = blk[a, b] \
                            - wgt * m[ee, a].conjugate() * m[ee, b]
        # real representation [[Re, -Im], [Im, Re]] of -2 blk
        for a in range(r):
            for b in range(r):
                z = -2.0 * blk[a, b]
                hess[2 * r * j + a, 2 * r * j + b] = z.real
                hess[2 * r * j + a, 2 * r * j + r + b] = -z.imag
                hess[2 * r * j + r + a, 2 * r * j + b] = z.imag
                hess[2 * r * j + r + a, 2 * r * j + r + b] = z.real

    for p in range(n_pairs):
        for a in range(n):
            vbar[a] += lam[p] * vs[p, a]
    for p in range(n_pairs):
        wgt = lam[p] * inv_tau
        for a in range(n):
            for b in range(n):
                hess[a, b] -= wgt * vs[p, a] * vs[p, b]
    for a in range(n):
        for b in range(n):
            hess[a, b] += inv_tau * vbar[a] * vbar[b]


cdef int _cholesky(double[:, ::1] b, double[:, ::1] low) nogil:
    """Lower Cholesky of SPD b into low; returns 0 on success."""
    cdef Py_ssize_t n = b.shape[0], i, j, t
    cdef double s
    for i in range(n):
        for j in range(n):
            low[i, j] = 0
    for i in range(n):
        for j in range(i + 1):
            s = b[i, j]
            for t in range(j):
                s -= low[i, t] * low[j, t]
            if i == j:
                if s <= 0:
                    return 1
                low[i, i] = sqrt(s)
            else:
                low[i, j] = s / low[j, j]
    return 0


cdef void _chol_solve(double[:, ::1] low, double[:] rhs, double[:] out,
                      double[:] tmp) nogil:
    """Solve (L L^T) out = rhs."""
    cdef Py_ssize_t n = low.shape[0], i, t
    cdef double s
    for i in range(n):
        s = rhs[i]
        for t in range(i):
            s -= low[i, t] * tmp[t]
        tmp[i] = s / low[i, i]
    for i in range(n - 1, -1, -1):
        s = tmp[i]
        for t in range(i + 1, n):
            s -= low[t, i] * out[t]
        out[i] = s / low[i, i]


cdef void _fwd_solve(double[:, ::1] low, double[:] rhs,
                     double[:] out) nogil:
    cdef Py_ssize_t n = low.shape[0], i, t
    cdef double s
    for i in range(n):
        s = rhs[i]
        for t in range(i):
            s -= low[i, t] * out[t]
        out[i] = s / low[i, i]


cdef double _vnorm(double[:] v) nogil:
    cdef Py_ssize_t i
    cdef double s = 0
    for i in range(v.shape[0]):
        s += v[i] * v[i]
    return sqrt(s)


cdef int _trs_step(double[:, ::1] hess, double[:] grad, double[:] x,
                   double radius, double[:, ::1] bmat, double[:, ::1] low,
                   double[:] w, double[:] p, double[:] z, double[:] tmp,
                   double[:] d) nogil:
    """d maximizes grad.d + d'Hd/2 over ||x + d|| <= radius; returns 0."""
    cdef Py_ssize_t n = grad.shape[0], a, b, it
    cdef double jitter, mu, munew, phi, q2, dmax
    dmax = 0
    for a in range(n):
        if hess[a, a] > dmax:
            dmax = hess[a, a]
        if -hess[a, a] > dmax:
            dmax = -hess[a, a]
    jitter = 1e-12 * (1.0 + dmax)

    # w = grad - H x (constant right-hand side of the secular system)
    for a in range(n):
        w[a] = grad[a]
        for b in range(n):
            w[a] -= hess[a, b] * x[b]

    for a in range(n):
        for b in range(n):
            bmat[a, b] = -hess[a, b]
        bmat[a, a] += jitter
    if _cholesky(bmat, low) == 0:
        _chol_solve(low, w, p, tmp)
        if _vnorm(p) <= radius * (1.0 + 1e-12):
            for a in range(n):
                d[a] = p[a] - x[a]
            return 0

    mu = jitter
    for it in range(60):
        for a in range(n):
            for b in range(n):
                bmat[a, b] = -hess[a, b]
            bmat[a, a] += mu
        if _cholesky(bmat, low) != 0:
            mu = 2.0 * mu + 1e-8
            continue
        _chol_solve(low, w, p, tmp)
        phi = _vnorm(p)
        if phi - radius <= 1e-11 * radius and radius - phi <= 1e-11 * radius:
            break
        _fwd_solve(low, p, z)
        q2 = 0
        for a in range(n):
            q2 += z[a] * z[a]
        if q2 <= 0:
            break
        munew = mu + (phi - radius) * phi * phi / (radius * q2)
        if munew < 0.5 * mu:
            munew = 0.5 * mu
        mu = munew
    for a in range(n):
        d[a] = p[a] - x[a]
    return 0


cdef void _pack(double complex[:, ::1] y, double[:] x) nogil:
    cdef Py_ssize_t r = y.shape[0], kc = y.shape[1], i, j
    for j in range(kc):
        for i in range(r):
            x[2 * r * j + i] = y[i, j].real
            x[2 * r * j + r + i] = y[i, j].imag


cdef void _unpack(double[:] x, double complex[:, ::1] y) nogil:
    cdef Py_ssize_t r = y.shape[0], kc = y.shape[1], i, j
    for j in range(kc):
        for i in range(r):
            y[i, j] = x[2 * r * j + i] + 1j * x[2 * r * j + r + i]


def solve_ascent(m_in, pk_in, pe_in, cst_in, l1_in, alpha_in, q1_in, q2a_in,
                 q2b_in, l2_in, ret_in, double radius, y0_in, tau_in,
                 double grad_tol, int max_inner, double beta, double c_armijo):
    """Returns (y_best, xi, g_best, iterations, converged)."""
    cdef double complex[:, ::1] m = np.ascontiguousarray(m_in, dtype=np.complex128)
    cdef int[:] pk = np.ascontiguousarray(pk_in, dtype=np.int32)
    cdef int[:] pe = np.ascontiguousarray(pe_in, dtype=np.int32)
    cdef double[:] cst = np.ascontiguousarray(cst_in, dtype=np.float64)
    cdef double[:] l1 = np.ascontiguousarray(l1_in, dtype=np.float64)
    cdef double complex[:] alpha = np.ascontiguousarray(alpha_in, dtype=np.complex128)
    cdef double[:] q1 = np.ascontiguousarray(q1_in, dtype=np.float64)
    cdef double[:] q2a = np.ascontiguousarray(q2a_in, dtype=np.float64)
    cdef double[:] q2b = np.ascontiguousarray(q2b_in, dtype=np.float64)
    cdef double[:] l2 = np.ascontiguousarray(l2_in, dtype=np.float64)
    cdef double complex[:, ::1] ret = np.ascontiguousarray(ret_in, dtype=np.complex128)
    cdef double[:] tau_schedule = np.ascontiguousarray(tau_in, dtype=np.float64)

    y_arr = np.array(y0_in, dtype=np.complex128, order="C", copy=True)
    cdef double complex[:, ::1] y = y_arr
    cdef Py_ssize_t rr = y.shape[0], kc = y.shape[1]
    cdef Py_ssize_t uu = m.shape[0], n_pairs = pk.shape[0]
    cdef Py_ssize_t nn = 2 * rr * kc

    cand_arr = np.zeros((rr, kc), dtype=np.complex128)
    best_arr = np.zeros((rr, kc), dtype=np.complex128)
    cdef double complex[:, ::1] cand = cand_arr
    cdef double complex[:, ::1] best = best_arr
    r_arr = np.zeros((uu, kc), dtype=np.complex128)
    cdef double complex[:, ::1] r_mat = r_arr
    g_arr = np.zeros(n_pairs, dtype=np.float64)
    cdef double[:] g = g_arr
    cdef double[:] lam = np.zeros(n_pairs)
    cdef double[:, ::1] vs = np.zeros((n_pairs, nn))
    cdef double complex[:, ::1] basem = np.zeros((rr, rr), dtype=np.complex128)
    cdef double complex[:, ::1] blkm = np.zeros((rr, rr), dtype=np.complex128)
    cdef double[:, ::1] hess = np.zeros((nn, nn))
    cdef double[:, ::1] bmat = np.zeros((nn, nn))
    cdef double[:, ::1] low = np.zeros((nn, nn))
    cdef double[:] grad = np.zeros(nn)
    cdef double[:] x = np.zeros(nn)
    cdef double[:] xc = np.zeros(nn)
    cdef double[:] wv = np.zeros(nn)
    cdef double[:] pv = np.zeros(nn)
    cdef double[:] zv = np.zeros(nn)
    cdef double[:] tv = np.zeros(nn)
    cdef double[:] dv = np.zeros(nn)

    cdef Py_ssize_t i, j, si, it, ls, a
    cdef double nrm, f_val, f_new, best_val, gmin, t, slope, ray, pgn, scale
    cdef double tau
    cdef int total_iter = 0
    cdef bint converged = False, accepted

    nrm = 0
    for i in range(rr):
        for j in range(kc):
            nrm += (y[i, j].real * y[i, j].real
                    + y[i, j].imag * y[i, j].imag)
    nrm = sqrt(nrm)
    if nrm > radius:
        scale = radius / nrm
        for i in range(rr):
            for j in range(kc):
                y[i, j] = y[i, j] * scale

    _matmul(m, y, r_mat)
    _pair_values(pk, pe, cst, l1, alpha, q1, q2a, q2b, l2, ret, r_mat, g)
    best_val = _min_of(g)
    best_arr[:] = y_arr

    for si in range(tau_schedule.shape[0]):
        tau = tau_schedule[si]
        converged = False
        for it in range(max_inner):
            total_iter += 1
            _matmul(m, y, r_mat)
            _pair_values(pk, pe, cst, l1, alpha, q1, q2a, q2b, l2, ret,
                         r_mat, g)
            f_val = _softmin(g, tau, lam)
            gmin = _min_of(g)
            if gmin > best_val:
                best_val = gmin
                best_arr[:] = y_arr
            _pair_grad_vs(m, pk, pe, l1, alpha, q1, q2a, q2b, l2, ret,
                          r_mat, vs)
            _hessian(m, pk, pe, q1, q2a, q2b, lam, tau, vs, basem, blkm,
                     grad, hess)
            _pack(y, x)

            nrm = _vnorm(x)
            ray = 0
            for a in range(nn):
                ray += x[a] * grad[a]
            if nrm >= radius * (1.0 - 1e-12) and ray > 0.0:
                pgn = 0
                for a in range(nn):
                    pgn += grad[a] * grad[a]
                pgn -= (ray * ray) / (nrm * nrm)
                pgn = sqrt(pgn) if pgn > 0.0 else 0.0
            else:
                pgn = _vnorm(grad)
            if pgn < grad_tol:
                converged = True
                break

            _trs_step(hess, grad, x, radius, bmat, low, wv, pv, zv, tv, dv)
            slope = 0
            for a in range(nn):
                slope += grad[a] * dv[a]
            if not (slope > 0.0):
                converged = True
                break
            accepted = False
            t = 1.0
            for ls in range(40):
                for a in range(nn):
                    xc[a] = x[a] + t * dv[a]
                _unpack(xc, cand)
                _matmul(m, cand, r_mat)
                _pair_values(pk, pe, cst, l1, alpha, q1, q2a, q2b, l2, ret,
                             r_mat, g)
                f_new = _softmin(g, tau, lam)
                if f_new >= f_val + c_armijo * t * slope and f_new > f_val:
                    accepted = True
                    break
                t *= beta
            if not accepted:
                converged = True
                break
            y_arr[:] = cand_arr

    _matmul(m, y, r_mat)
    _pair_values(pk, pe, cst, l1, alpha, q1, q2a, q2b, l2, ret, r_mat, g)
    gmin = _min_of(g)
    if gmin > best_val:
        best_val = gmin
        best_arr[:] = y_arr

    _matmul(m, best, r_mat)
    _pair_values(pk, pe, cst, l1, alpha, q1, q2a, q2b, l2, ret, r_mat, g)
    gmin = _min_of(g)
    return best_arr, float(gmin), g_arr.copy(), int(total_iter), bool(converged)

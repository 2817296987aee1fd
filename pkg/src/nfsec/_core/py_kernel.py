"""Reference numpy implementation of the soft-min ascent kernel.

The subproblem lives in the span of the stacked user channels: W = Q Y with
Q an orthonormal basis (N_b x r), so the iterate Y is r x K and every
quantity below is independent of N_b. R = M Y collects the projected rows
h_u^H W for all users (M = rows @ Q).

Per pair p the surrogate value is the quadratic

    g_p(R) = cst_p + l1_p Re[conj(alpha_p) R[pk_p, k_p]]
             - q1_p sum_j |R[pk_p, j]|^2
             - q2a_p sum_j |R[pe_p, j]|^2
             + l2_p Re[sum_j conj(ret_p[j]) R[pe_p, j]]
             - q2b_p (sum_j |R[pe_p, j]|^2 - |R[pe_p, k_p]|^2)

with ret_p[k_p] = 0 by construction and all f2 coefficients zero for
rate-only pairs (pe_p = -1, mapped to a zero channel row).

min_p g_p is maximized over the Frobenius ball through its soft-min
smoothing -tau log sum exp(-g/tau), annealed down a tau schedule. The
smoothed objective is strictly concave with condition numbers around 1e5
from the mixed LUE/EUE link budgets, so each iterate takes an exact
trust-region Newton step (the Hessian is a few rank-1 blocks; the space
has at most a few dozen real dimensions) instead of gradient ascent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class KernelProblem:
    """Arrays shared by both backends; see module docstring for the model."""

    m: np.ndarray        # (U, r) complex, maps Y -> R
    pk: np.ndarray       # (P,) int32 LUE row per pair (also the stream index)
    pe: np.ndarray       # (P,) int32 EUE row per pair, -1 if none
    cst: np.ndarray      # (P,) float
    l1: np.ndarray       # (P,) float
    alpha: np.ndarray    # (P,) complex
    q1: np.ndarray       # (P,) float
    q2a: np.ndarray      # (P,) float
    q2b: np.ndarray      # (P,) float
    l2: np.ndarray       # (P,) float
    ret: np.ndarray      # (P, K) complex, zeroed at column k_p
    radius: float        # Frobenius budget sqrt(K)


@dataclass
class SolveResult:
    y: np.ndarray
    xi: float            # min_p g_p at the returned iterate
    g: np.ndarray        # per-pair surrogate values at the returned iterate
    iterations: int
    converged: bool


def _eue_rows_index(prob: KernelProblem):
    # map pe = -1 onto an all-zero virtual row so vector ops stay branch-free
    return np.where(prob.pe >= 0, prob.pe, 0), (prob.pe >= 0)


def pair_values(prob: KernelProblem, r_mat: np.ndarray) -> np.ndarray:
    """g_p for every pair at projected rows R."""
    idx_e, has_e = _eue_rows_index(prob)
    k = prob.pk
    ks = np.arange(len(k))
    row_k = r_mat[k, :]                       # (P, K)
    row_e = r_mat[idx_e, :] * has_e[:, None]
    sum_k = np.sum(np.abs(row_k) ** 2, axis=1)
    sum_e = np.sum(np.abs(row_e) ** 2, axis=1)
    diag = row_k[ks, k]                       # R[k_p, k_p]
    lin1 = np.real(np.conj(prob.alpha) * diag)
    lin2 = np.real(np.sum(np.conj(prob.ret) * row_e, axis=1))
    ek = np.abs(row_e[ks, k]) ** 2
    return (prob.cst + prob.l1 * lin1 - prob.q1 * sum_k
            - prob.q2a * sum_e + prob.l2 * lin2 - prob.q2b * (sum_e - ek))


def softmin(g: np.ndarray, tau: float):
    """(-tau log-sum-exp(-g/tau), softmax weights of -g/tau)."""
    z = -(g - g.min()) / tau
    w = np.exp(z)
    s = w.sum()
    return float(g.min() - tau * np.log(s)), w / s


def _pair_gradients(prob: KernelProblem, r_mat: np.ndarray) -> np.ndarray:
    """Complex gradient G_p of every pair, stacked (P, r, K); real pairing
    g_p(Y + D) - g_p(Y) ~ Re sum conj(G_p) * D."""
    idx_e, has_e = _eue_rows_index(prob)
    k = prob.pk
    ks = np.arange(len(k))
    row_k = r_mat[k, :]
    row_e = r_mat[idx_e, :] * has_e[:, None]
    cv_k = (-2.0 * prob.q1)[:, None] * row_k
    cv_k[ks, k] += prob.l1 * prob.alpha
    cv_e = ((-2.0 * (prob.q2a + prob.q2b))[:, None] * row_e
            + prob.l2[:, None] * prob.ret)
    cv_e[ks, k] += 2.0 * prob.q2b * row_e[ks, k]
    cv_e *= has_e[:, None]
    m_k = prob.m[k, :]
    m_e = prob.m[idx_e, :] * has_e[:, None]
    return (m_k.conj()[:, :, None] * cv_k[:, None, :]
            + m_e.conj()[:, :, None] * cv_e[:, None, :])


def objective_and_grad(prob: KernelProblem, y: np.ndarray, tau: float):
    """Soft-min objective F(Y) and its gradient (real pairing convention:
    F(Y + D) - F(Y) ~ Re sum conj(G) * D)."""
    r_mat = prob.m @ y
    g = pair_values(prob, r_mat)
    f_val, lam = softmin(g, tau)
    grads = _pair_gradients(prob, r_mat)
    grad_y = np.tensordot(lam, grads, axes=1)
    return f_val, g, grad_y


def _objective(prob: KernelProblem, y: np.ndarray, tau: float) -> float:
    g = pair_values(prob, prob.m @ y)
    return softmin(g, tau)[0]


def _pack(y: np.ndarray) -> np.ndarray:
    """(r, K) complex -> real vector, column blocks [Re y_j; Im y_j]."""
    r, kk = y.shape
    out = np.empty(2 * r * kk)
    for j in range(kk):
        out[2 * r * j:2 * r * j + r] = y[:, j].real
        out[2 * r * j + r:2 * r * (j + 1)] = y[:, j].imag
    return out


def _unpack(x: np.ndarray, r: int, kk: int) -> np.ndarray:
    y = np.empty((r, kk), dtype=complex)
    for j in range(kk):
        y[:, j] = x[2 * r * j:2 * r * j + r] \
            + 1j * x[2 * r * j + r:2 * r * (j + 1)]
    return y


def _real_block(c: np.ndarray) -> np.ndarray:
    """Hermitian r x r -> symmetric 2r x 2r acting on [Re; Im]."""
    re, im = c.real, c.imag
    return np.block([[re, -im], [im, re]])


def hessian(prob: KernelProblem, y: np.ndarray, tau: float):
    """Real-packed Hessian of the soft-min objective at Y, plus the value,
    pair values, and packed gradient (they come out for free)."""
    r_mat = prob.m @ y
    g = pair_values(prob, r_mat)
    f_val, lam = softmin(g, tau)
    grads = _pair_gradients(prob, r_mat)

    idx_e, has_e = _eue_rows_index(prob)
    k = prob.pk
    r, kk = y.shape
    n = 2 * r * kk
    m_k = prob.m[k, :]
    m_e = prob.m[idx_e, :] * has_e[:, None]

    # column-separable quadratic part: per column j the complex block is
    # -2 [sum_p lam q1 mk^H mk + sum_p lam (q2a + q2b [j != k_p]) me^H me]
    w_k = lam * prob.q1
    w_e = lam * (prob.q2a + prob.q2b)
    base = (m_k.conj().T * w_k) @ m_k + (m_e.conj().T * w_e) @ m_e
    hess = np.zeros((n, n))
    for j in range(kk):
        sel = (k == j)
        corr = ((m_e[sel].conj().T * (lam[sel] * prob.q2b[sel]))
                @ m_e[sel]) if np.any(sel) else 0.0
        blk = _real_block(-2.0 * (base - corr))
        hess[2 * r * j:2 * r * (j + 1), 2 * r * j:2 * r * (j + 1)] = blk

    # curvature of the smoothing: -(1/tau) (sum lam v v^T - V V^T)
    vs = np.stack([_pack(grads[p]) for p in range(len(k))])
    v_mean = lam @ vs
    hess -= (vs.T * lam) @ vs / tau
    hess += np.outer(v_mean, v_mean) / tau
    return hess, f_val, g, v_mean


def _trs_step(hess: np.ndarray, grad: np.ndarray, x: np.ndarray,
              radius: float) -> np.ndarray:
    """Maximize g.d + d'Hd/2 subject to ||x + d|| <= radius (H <= 0).

    B(mu) = mu I - H is SPD for every mu >= 0, so the boundary point
    p(mu) = B(mu)^{-1} (g - H x) follows from one Cholesky per Newton
    update of mu; no hard case exists.
    """
    n = len(grad)
    jitter = 1e-12 * (1.0 + np.max(np.abs(np.diag(hess))))
    b0 = -hess + jitter * np.eye(n)
    w = grad - hess @ x
    try:
        p = np.linalg.solve(b0, w)
    except np.linalg.LinAlgError:
        p = np.full(n, np.inf)
    if np.all(np.isfinite(p)) and np.linalg.norm(p) <= radius * (1 + 1e-12):
        return p - x

    # boundary solution: Newton on 1/phi(mu) - 1/radius
    mu = jitter
    eye = np.eye(n)
    for _ in range(60):
        b = mu * eye - hess
        try:
            low = np.linalg.cholesky(b)
        except np.linalg.LinAlgError:
            mu = 2.0 * mu + 1e-8
            continue
        p = np.linalg.solve(low.T, np.linalg.solve(low, w))
        phi = np.linalg.norm(p)
        if abs(phi - radius) <= 1e-11 * radius:
            break
        z = np.linalg.solve(low, p)
        q2 = float(z @ z)
        if q2 <= 0.0:
            break
        step = (phi - radius) * phi * phi / (radius * q2)
        mu = max(mu + step, 0.5 * mu)
    return p - x


def solve_ascent(prob: KernelProblem, y0: np.ndarray, tau_schedule,
                 grad_tol: float = 1e-6, max_inner: int = 200,
                 beta: float = 0.5, c_armijo: float = 1e-4) -> SolveResult:
    """Trust-region Newton ascent on softmin_tau(g), annealing tau down
    the schedule and warm-starting each stage. Keeps the iterate with the
    best true min_p g_p ever seen, so the result never falls below the
    start. Line-searched along the Newton direction; both endpoints of
    the search segment are feasible, so no projection is needed."""
    r, kk = y0.shape
    y = y0.astype(complex)
    nrm = np.linalg.norm(y)
    if nrm > prob.radius:
        y = y * (prob.radius / nrm)
    g = pair_values(prob, prob.m @ y)
    best_val = float(g.min())
    best_y = y.copy()
    total_iter = 0
    converged = False

    for tau in tau_schedule:
        # a stage counts as converged unless it ran out of budget; a failed
        # strict-ascent line search means numerically stationary
        converged = False
        for inner in range(max_inner):
            total_iter += 1
            hess, f_val, g, grad = hessian(prob, y, tau)
            if g.min() > best_val:
                best_val = float(g.min())
                best_y = y.copy()

            x = _pack(y)
            nrm_y = np.linalg.norm(x)
            pg = grad.copy()
            if nrm_y >= prob.radius * (1.0 - 1e-12):
                ray = float(x @ grad)
                if ray > 0.0:
                    pg -= (ray / nrm_y ** 2) * x
            if np.linalg.norm(pg) < grad_tol:
                converged = True
                break

            d = _trs_step(hess, grad, x, prob.radius)
            slope = float(grad @ d)
            if not np.isfinite(slope) or slope <= 0.0:
                converged = True
                break
            accepted = False
            t = 1.0
            for _ in range(40):
                cand = _unpack(x + t * d, r, kk)
                f_new = _objective(prob, cand, tau)
                if f_new >= f_val + c_armijo * t * slope and f_new > f_val:
                    accepted = True
                    break
                t *= beta
            if not accepted:
                converged = True
                break
            y = cand

    g = pair_values(prob, prob.m @ y)
    if g.min() > best_val:
        best_val = float(g.min())
        best_y = y
    g_best = pair_values(prob, prob.m @ best_y)
    return SolveResult(y=best_y, xi=float(g_best.min()), g=g_best,
                       iterations=total_iter, converged=converged)

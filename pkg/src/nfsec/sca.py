"""Successive convex approximation step for the beamfocusing matrix.

Each call fixes the AN/power split, then alternates (a) sandwich-bounding
every secrecy pair around the current W and (b) maximizing the soft-min of
the concave surrogates inside the transmit-power ball with a trust-region
Newton ascent, re-linearizing until the true min pair margin stalls. The
search runs in the span of the stacked user channels (W = Q Y), which keeps
the per-iteration cost independent of the array size.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._core import KernelProblem, SolveResult, pair_values, solve_ascent
from .channel import ChannelSet
from .precoding import PrecodingState


@dataclass(frozen=True)
class ScaOptions:
    tau_schedule: tuple = (1.0, 0.1, 0.01, 1e-3)
    grad_tol: float = 1e-6
    max_inner: int = 200
    beta: float = 0.5
    c_armijo: float = 1e-4
    tol_opt: float = 1e-5
    tol_feas: float = 1e-6
    max_rounds: int = 40      # re-linearizations per beamfocusing update
    round_tol: float = 1e-5   # relative margin gain per round that counts as stalled


@dataclass
class SubproblemResult:
    w: np.ndarray
    xi: float                 # min pair margin (unclamped) at w
    xi_start: float           # min pair margin at the entry W
    g: np.ndarray             # per-pair margins at w
    pairs: list               # (e, k) with e = None for rate-only pairs
    iterations: int           # total Newton iterations across rounds
    converged: bool           # margin gain stalled before the round budget
    warning: str | None


def reduced_basis(channels: ChannelSet, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis Q (N_b x r) of the span of all user channels.

    Any component of W orthogonal to every h_u changes no rate and only
    wastes power, so restricting W to this span loses nothing.
    """
    h_all = channels.all_rows.conj().T        # N_b x U, columns are h_u
    q, r = np.linalg.qr(h_all)
    d = np.abs(np.diag(r))
    keep = d > tol * max(d.max(), 1.0)
    return np.ascontiguousarray(q[:, keep])


def scaled_rows(channels: ChannelSet, state: PrecodingState,
                sigma2: float) -> np.ndarray:
    """Rows h_u^H / sqrt(n_u) so every user sees unit effective noise.

    n_u folds the power split and (for EUEs) the AN floor into the noise:
    n = sigma^2 / eps_s for LUEs, (eps_a |h^H V|^2 + sigma^2) / eps_s for
    EUEs. The LUE rows rely on V nulling the legitimate channels exactly.
    """
    rows = channels.all_rows
    k = channels.k_lues
    n_u = np.empty(rows.shape[0])
    n_u[:k] = sigma2 / state.eps_s
    leak = rows[k:] @ state.v
    an_pow = np.sum(np.abs(leak) ** 2, axis=1)
    n_u[k:] = (state.eps_a * an_pow + sigma2) / state.eps_s
    return rows / np.sqrt(n_u)[:, None]


def _pair_list(k_lues: int, e_eues: int, mode: str) -> list:
    if mode == "s2":
        return [(e, k) for e in range(e_eues) for k in range(k_lues)]
    if mode == "s1":
        return [(None, k) for k in range(k_lues)]
    raise ValueError(f"unknown mode: {mode!r}")


def build_problem(rows_sc: np.ndarray, q_basis: np.ndarray, w_t: np.ndarray,
                  k_lues: int, mode: str):
    """KernelProblem linearized at w_t, plus (Y0, pair list).

    Surrogate coefficients come from the unit-noise SINR split at the
    expansion point: a = |r[k,k]|^2, b = sum_{j!=k} |r[k,j]|^2, s = 1.
    """
    n_k = w_t.shape[1]
    pairs = _pair_list(k_lues, rows_sc.shape[0] - k_lues, mode)
    m_mat = np.ascontiguousarray(rows_sc @ q_basis)
    y0 = q_basis.conj().T @ w_t
    r_t = m_mat @ y0

    n_pairs = len(pairs)
    pk = np.zeros(n_pairs, dtype=np.int32)
    pe = np.full(n_pairs, -1, dtype=np.int32)
    cst = np.zeros(n_pairs)
    l1 = np.zeros(n_pairs)
    alpha = np.zeros(n_pairs, dtype=complex)
    q1 = np.zeros(n_pairs)
    q2a = np.zeros(n_pairs)
    q2b = np.zeros(n_pairs)
    l2 = np.zeros(n_pairs)
    ret = np.zeros((n_pairs, n_k), dtype=complex)

    for p, (e, k) in enumerate(pairs):
        pk[p] = k
        row = r_t[k]
        a = np.abs(row[k]) ** 2
        b = float(np.sum(np.abs(row) ** 2) - a)
        d1, d2 = a + b + 1.0, b + 1.0
        cst[p] = np.log1p(a / d2) - (a + 1.0) / d2 + 1.0 / d1
        l1[p] = 2.0 / d2
        alpha[p] = row[k]
        q1[p] = a / (d1 * d2)
        if e is not None:
            u = k_lues + e
            pe[p] = u
            row_e = r_t[u]
            ae = np.abs(row_e[k]) ** 2
            be = float(np.sum(np.abs(row_e) ** 2) - ae)
            d1e, d2e = ae + be + 1.0, be + 1.0
            cst[p] -= np.log1p(ae / d2e) + be - ae / (d1e * d2e)
            q2a[p] = 1.0 / d1e
            l2[p] = 2.0
            q2b[p] = be / d2e
            ret[p] = row_e
            ret[p, k] = 0.0

    prob = KernelProblem(
        m=m_mat, pk=pk, pe=pe, cst=cst, l1=l1, alpha=alpha, q1=q1,
        q2a=q2a, q2b=q2b, l2=l2, ret=ret, radius=float(np.sqrt(n_k)))
    return prob, y0, pairs


def solve_subproblem(channels: ChannelSet, state: PrecodingState,
                     sigma2: float, mode: str = "s2",
                     opts: ScaOptions = ScaOptions(),
                     q_basis: np.ndarray | None = None) -> SubproblemResult:
    """Beamfocusing update: maximize the min pair margin over ||W||_F^2 <= K.

    Runs SCA proper: bound the pairs around the current point, maximize the
    concave surrogate min exactly, move, re-bound, until the true margin
    stops improving (round_tol) or max_rounds re-linearizations pass. Bound
    tightness at each expansion point makes the true min margin
    non-decreasing across rounds, so the entry W is never worse than the
    exit W (up to tol_opt).
    """
    if q_basis is None:
        q_basis = reduced_basis(channels)
    rows_sc = scaled_rows(channels, state, sigma2)
    k_lues = channels.k_lues

    w_cur = state.w
    xi_start = None
    xi_prev = None
    pairs = None
    total_it = 0
    warning = None
    converged = False
    rescaled = False

    for _ in range(opts.max_rounds):
        prob, y0, pairs = build_problem(rows_sc, q_basis, w_cur, k_lues, mode)
        # tight bounds: surrogate at the expansion point = true margins
        g_here = pair_values(prob, prob.m @ y0)
        xi_here = float(np.min(g_here))
        if xi_start is None:
            xi_start = xi_here
        elif xi_here - xi_prev <= opts.round_tol * max(1.0, abs(xi_prev)):
            converged = True
            break
        xi_prev = xi_here

        res: SolveResult = solve_ascent(
            prob, y0, np.asarray(opts.tau_schedule), grad_tol=opts.grad_tol,
            max_inner=opts.max_inner, beta=opts.beta, c_armijo=opts.c_armijo)
        total_it += res.iterations
        if res.xi < xi_here - opts.tol_opt:
            # keep-best makes this unreachable unless the arrays are corrupt
            warning = (f"surrogate objective regressed "
                       f"({res.xi:.6g} < {xi_here:.6g}), keeping start")
            warnings.warn(warning, RuntimeWarning, stacklevel=2)
            converged = True
            break

        w_new = q_basis @ res.y
        fro2 = float(np.linalg.norm(w_new) ** 2)
        if fro2 > prob.radius**2 + opts.tol_feas:
            w_new *= prob.radius / np.sqrt(fro2)
            rescaled = True
        w_cur = w_new

    prob, y0, pairs = build_problem(rows_sc, q_basis, w_cur, k_lues, mode)
    g_final = pair_values(prob, prob.m @ y0)
    xi_final = float(np.min(g_final))
    if xi_start is None:
        xi_start = xi_final
    if rescaled and warning is None:
        warning = "an iterate left the power ball and was rescaled onto it"
    if not converged and warning is None:
        warning = "margin still improving when the re-linearization budget ran out"

    return SubproblemResult(
        w=w_cur, xi=xi_final, xi_start=xi_start, g=g_final, pairs=pairs,
        iterations=total_it, converged=converged, warning=warning)

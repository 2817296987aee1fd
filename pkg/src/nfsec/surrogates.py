"""Concave lower / convex upper bounds on ln(1 + ||g1||^2 / (||g2||^2 + s2))
around an expansion point (g1_t, g2_t), and the per-pair SCA surrogate built
from them.

Both bounds are evaluated exactly as published, term by term, so tests can
check each piece. They are tight at the expansion point. The per-pair
surrogate for stream k at LUE k versus EUE e splits the projected row
h^H W into (h^H w_k, h^H W_k) with W_k denoting W without column k; the
effective noise s2 takes the LUE value inside f1 and the EUE value inside f2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _norms(g1, g2, g1_t, g2_t):
    return (float(np.abs(g1) ** 2), float(np.linalg.norm(g2) ** 2),
            float(np.abs(g1_t) ** 2), float(np.linalg.norm(g2_t) ** 2))


def f1_lower(g1, g2, g1_t, g2_t, sigma2: float) -> float:
    """Concave lower bound, tight at (g1_t, g2_t)."""
    p1, p2, a, b = _norms(g1, g2, g1_t, g2_t)
    d1 = a + b + sigma2
    d2 = b + sigma2
    return (np.log(1.0 + a / d2)
            - (a + sigma2) / d2
            + sigma2 / d1
            + 2.0 * np.real(g1 * np.conj(g1_t)) / d2
            - a * (p1 + p2) / (d1 * d2))


def f2_upper(g1, g2, g1_t, g2_t, sigma2: float) -> float:
    """Convex upper bound, tight at (g1_t, g2_t)."""
    p1, p2, a, b = _norms(g1, g2, g1_t, g2_t)
    d1 = a + b + sigma2
    d2 = b + sigma2
    return (np.log(1.0 + a / d2)
            + b / sigma2
            - a * sigma2 / (d1 * d2)
            + (p1 + p2) / d1
            - 2.0 * np.real(np.vdot(g2_t, g2)) / sigma2
            + b * p2 / (d2 * sigma2))


def f1_lower_grad(g1, g2, g1_t, g2_t, sigma2: float):
    """Gradient of f1 in (g1, g2); df = 2 Re[conj(G1) dg1 + <G2, dg2>]."""
    _, _, a, b = _norms(g1, g2, g1_t, g2_t)
    d1 = a + b + sigma2
    d2 = b + sigma2
    q = a / (d1 * d2)
    return g1_t / d2 - q * g1, -q * np.asarray(g2)


def f2_upper_grad(g1, g2, g1_t, g2_t, sigma2: float):
    """Gradient of f2 in (g1, g2), same convention as f1_lower_grad."""
    _, _, a, b = _norms(g1, g2, g1_t, g2_t)
    d1 = a + b + sigma2
    d2 = b + sigma2
    return g1 / d1, np.asarray(g2) / d1 - np.asarray(g2_t) / sigma2 \
        + (b / (d2 * sigma2)) * np.asarray(g2)


def true_log_ratio(g1, g2, sigma2: float) -> float:
    """The bounded quantity ln(1 + ||g1||^2/(||g2||^2 + sigma2))."""
    return float(np.log1p(np.abs(g1) ** 2 / (np.linalg.norm(g2) ** 2 + sigma2)))


@dataclass(frozen=True)
class SurrogatePoint:
    """Expansion data at W_t: projected rows for every user.

    rows: (K+E, N_b) channel rows, LUEs first.
    r_t:  (K+E, K) = rows @ W_t.
    s2:   (K+E,) effective noise per user at the current power split.
    """

    rows: np.ndarray
    r_t: np.ndarray
    s2: np.ndarray
    k_lues: int


def expansion_point(channels, w_t: np.ndarray, s2_lue: np.ndarray,
                    s2_eue: np.ndarray) -> SurrogatePoint:
    rows = channels.all_rows
    s2 = np.concatenate([np.asarray(s2_lue, float), np.asarray(s2_eue, float)])
    return SurrogatePoint(rows=rows, r_t=rows @ w_t, s2=s2,
                          k_lues=channels.k_lues)


def _split(row_proj: np.ndarray, k: int):
    g1 = row_proj[k]
    g2 = np.delete(row_proj, k)
    return g1, g2


def pair_surrogate(point: SurrogatePoint, w: np.ndarray, k: int,
                   e: int | None) -> float:
    """Surrogate secrecy rate g_{k,e}(W) = f1(LUE k terms) - f2(EUE e terms).

    e=None gives the rate-only surrogate (f1 term alone) used when
    eavesdropper CSI is not exploited.
    """
    rk = point.rows[k] @ w
    g1, g2 = _split(rk, k)
    g1t, g2t = _split(point.r_t[k], k)
    val = f1_lower(g1, g2, g1t, g2t, point.s2[k])
    if e is not None:
        u = point.k_lues + e
        re_ = point.rows[u] @ w
        h1, h2 = _split(re_, k)
        h1t, h2t = _split(point.r_t[u], k)
        val -= f2_upper(h1, h2, h1t, h2t, point.s2[u])
    return float(val)

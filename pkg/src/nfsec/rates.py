"""Achievable rates and secrecy rates under signal-plus-AN transmission.

Everything internal is in nats; CLI/report layers divide by ln 2 for bits.
Channel arguments are h^H rows as produced by nfsec.channel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .precoding import PrecodingState

NATS_TO_BITS = 1.0 / np.log(2.0)


@dataclass(frozen=True)
class RateBreakdown:
    """Pieces of one user/stream rate evaluation (powers in watts)."""

    signal_power: float      # |h^H w_k|^2, precoder units
    interference: float      # sum_{j != k} |h^H w_j|^2
    an_power: float          # ||h^H V||^2 (before eps_a scaling)
    sigma_eps2: float        # effective noise after dividing by eps_s
    rate_nats: float


def effective_noise(h_row: np.ndarray, state: PrecodingState, sigma2: float,
                    is_eue: bool) -> float:
    """sigma_eps^2 = (1_EUE * eps_a ||h^H V||^2 + sigma^2) / eps_s.

    The AN term enters only for eavesdroppers; LUEs sit in the projector
    null space by construction.
    """
    an = float(np.linalg.norm(h_row @ state.v) ** 2) if is_eue else 0.0
    return (state.eps_a * an + sigma2) / state.eps_s


def rate(h_row: np.ndarray, k: int, state: PrecodingState, sigma2: float,
         is_eue: bool) -> RateBreakdown:
    """Rate of stream k at the user with channel row h^H (compact form),

        R = ln(1 + |h^H w_k|^2 / (sum_{j!=k} |h^H w_j|^2 + sigma_eps^2)).
    """
    g = h_row @ state.w
    p = np.abs(g) ** 2
    sig = float(p[k])
    interf = float(p.sum() - p[k])
    an = float(np.linalg.norm(h_row @ state.v) ** 2) if is_eue else 0.0
    s_eps = (state.eps_a * an + sigma2) / state.eps_s
    r = float(np.log1p(sig / (interf + s_eps)))
    return RateBreakdown(signal_power=sig, interference=interf, an_power=an,
                         sigma_eps2=s_eps, rate_nats=r)


def rate_direct(h_row: np.ndarray, k: int, state: PrecodingState, sigma2: float,
                is_eue: bool) -> float:
    """Same rate from the explicit power-weighted form, kept as an
    independent evaluation path:

        R = ln(1 + eps_s |h^H w_k|^2 /
               (eps_s sum_{j!=k} |h^H w_j|^2 + 1_EUE eps_a ||h^H V||^2 + sigma^2)).
    """
    g = h_row @ state.w
    p = np.abs(g) ** 2
    num = state.eps_s * float(p[k])
    den = state.eps_s * float(p.sum() - p[k]) + sigma2
    if is_eue:
        den += state.eps_a * float(np.linalg.norm(h_row @ state.v) ** 2)
    return float(np.log1p(num / den))


def secrecy_rate(channels, k: int, e: int, state: PrecodingState,
                 sigma2: float) -> float:
    """S_{e,k} = [R_{k,k} - R_{e,k}]^+ in nats."""
    r_kk = rate(channels.lue_rows[k], k, state, sigma2, is_eue=False).rate_nats
    r_ek = rate(channels.eue_rows[e], k, state, sigma2, is_eue=True).rate_nats
    return max(0.0, r_kk - r_ek)


def rate_tables(channels, state: PrecodingState, sigma2: float):
    """Vectorized (R_kk vector, R_ek matrix) for all LUE streams/EUE pairs."""
    gl = channels.lue_rows @ state.w            # (K, K)
    pl = np.abs(gl) ** 2
    sig = np.diag(pl)
    interf = pl.sum(axis=1) - sig
    r_kk = np.log1p(sig / (interf + sigma2 / state.eps_s))

    ge = channels.eue_rows @ state.w            # (E, K)
    pe = np.abs(ge) ** 2
    an = np.linalg.norm(channels.eue_rows @ state.v, axis=1) ** 2
    den = (pe.sum(axis=1, keepdims=True) - pe
           + ((state.eps_a * an + sigma2) / state.eps_s)[:, None])
    r_ek = np.log1p(pe / den)
    return r_kk, r_ek


def secrecy_table(channels, state: PrecodingState, sigma2: float) -> np.ndarray:
    """E x K matrix of [R_kk - R_ek]^+ values."""
    r_kk, r_ek = rate_tables(channels, state, sigma2)
    return np.maximum(0.0, r_kk[None, :] - r_ek)


def min_secrecy_rate(channels, state: PrecodingState, sigma2: float):
    """Minimum S_{e,k} over all pairs and its 0-based (e, k) argmin;
    ties break lexicographically, e varying slowest."""
    s = secrecy_table(channels, state, sigma2)
    idx = np.unravel_index(int(np.argmin(s, axis=None)), s.shape)
    return float(s[idx]), (int(idx[0]), int(idx[1]))

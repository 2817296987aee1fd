"""Signal precoders, the null-space artificial-noise projector, and the
transmit power split.

Power model: signal streams get eps_s = eps*P_b/K each, AN dimensions get
eps_a = (1-eps)*P_b/N_b each, so eps=1 switches the AN off exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def power_split(epsilon: float, p_b: float, k: int, n_b: int):
    """(eps_s, eps_a) for power-allocation factor eps in (0, 1]."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if p_b <= 0:
        raise ValueError("p_b must be positive")
    return epsilon * p_b / k, (1.0 - epsilon) * p_b / n_b


@dataclass(frozen=True)
class PrecodingState:
    """Transmit-side state: beamfocusing matrix, AN projector, power split.

    w is N_b x K with ||w||_F^2 <= K; v is the N_b x N_b AN shaping matrix
    (Hermitian idempotent when built from null_space_an).
    """

    w: np.ndarray
    v: np.ndarray
    epsilon: float
    p_b: float

    @property
    def n_b(self) -> int:
        return self.w.shape[0]

    @property
    def k(self) -> int:
        return self.w.shape[1]

    @property
    def eps_s(self) -> float:
        return power_split(self.epsilon, self.p_b, self.k, self.n_b)[0]

    @property
    def eps_a(self) -> float:
        return power_split(self.epsilon, self.p_b, self.k, self.n_b)[1]

    @property
    def tx_power(self) -> float:
        """E||x||^2 = eps_s ||W||_F^2 + eps_a tr(V^H V)."""
        return (self.eps_s * float(np.linalg.norm(self.w) ** 2)
                + self.eps_a * float(np.real(np.trace(self.v.conj().T @ self.v))))


def state_residuals(state: PrecodingState, h_b: np.ndarray) -> dict:
    """Invariant residuals used by the validation suite."""
    v = state.v
    return {
        "w_power_excess": float(np.linalg.norm(state.w) ** 2 - state.k),
        "v_hermitian": float(np.linalg.norm(v - v.conj().T)),
        "v_idempotent": float(np.linalg.norm(v @ v - v)),
        "v_nulls_lues": float(np.linalg.norm(h_b.conj().T @ v)),
        "h_b_norm": float(np.linalg.norm(h_b)),
    }


def null_space_an(h_b: np.ndarray, rescale: bool = False) -> np.ndarray:
    """Orthogonal projector onto the complement of the LUE channel span:

        V = I - H_b (H_b^H H_b)^{-1} H_b^H

    Raises if H_b is rank deficient (reporting the condition number); applies
    a Tikhonov diagonal of 1e-12 tr(H^H H)/K when the Gram matrix condition
    number exceeds 1e10. trace(V) = N_b - K; rescale=True multiplies by
    sqrt(N_b/(N_b-K)) to meet the nominal trace(V^H V) = N_b power convention
    at the cost of idempotency (off by default; the projector is what the
    power model uses).
    """
    h_b = np.asarray(h_b)
    n_b, k = h_b.shape
    gram = h_b.conj().T @ h_b
    cond = float(np.linalg.cond(gram))
    if np.linalg.matrix_rank(h_b) < k:
        raise ValueError(
            f"LUE channel matrix is rank deficient (gram condition number {cond:.3e})")
    if cond > 1e10:
        gram = gram + (1e-12 * np.real(np.trace(gram)) / k) * np.eye(k)
    v = np.eye(n_b, dtype=complex) - h_b @ np.linalg.solve(gram, h_b.conj().T)
    if rescale:
        v = v * np.sqrt(n_b / (n_b - k))
    return v


def rzf_init(h_b: np.ndarray, sigma2: float) -> np.ndarray:
    """Regularized channel-inverse start W0 = (H_b H_b^H + sigma2 I)^{-1} H_b,
    rescaled to ||W||_F^2 = K.

    Computed through the K x K identity (H H^H + s I)^{-1} H = H (H^H H + s I)^{-1}
    to stay cheap for large arrays.
    """
    h_b = np.asarray(h_b)
    k = h_b.shape[1]
    gram = h_b.conj().T @ h_b + sigma2 * np.eye(k)
    w = h_b @ np.linalg.inv(gram)
    return w * np.sqrt(k) / np.linalg.norm(w)


def mrt_beamfocus(h_b: np.ndarray) -> np.ndarray:
    """Matched filter: column k = h_kb / ||h_kb||; ||W||_F^2 = K already."""
    h_b = np.asarray(h_b)
    return h_b / np.linalg.norm(h_b, axis=0, keepdims=True)


def ff_beamform(scenario, sigma2: float) -> np.ndarray:
    """Far-field-designed precoder: rzf_init applied to plane-wave channels
    (quadratic phase terms dropped; same beta and carrier phase). The result
    is always evaluated on the true near-field channels by the caller.
    """
    from .channel import los_channel

    rows = np.array([los_channel(scenario.geom, u, far_field=True)
                     for u in scenario.lues])
    return rzf_init(rows.conj().T, sigma2)

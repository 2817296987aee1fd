"""Power-allocation step: secrecy-rate derivative in eps, its approximate
roots, and golden-section maximization over the bottleneck pair.

eps is the fraction of P_b spent on signal (eps_s = eps P_b / K per stream,
eps_a = (1-eps) P_b / N_b per AN dimension).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rates import min_secrecy_rate, rate_tables

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PowerCoefficients:
    """Scalars that fix S_{e,k} as a function of eps for frozen (W, V):
    a1 = |h_k^H w_k|^2, b1 = ||h_k^H W_k||^2 (LUEk signal/interference),
    a2 = |h_e^H w_k|^2, b2 = ||h_e^H W_k||^2 (EUEe on stream k),
    v  = ||h_e^H V||^2 (AN power density at EUE e).
    """

    a1: float
    b1: float
    a2: float
    b2: float
    v: float
    k: int
    n_b: int
    p_b: float
    sigma2: float

    def rate_lue(self, eps) -> np.ndarray:
        es = np.asarray(eps) * self.p_b / self.k
        return np.log1p(es * self.a1 / (es * self.b1 + self.sigma2))

    def rate_eue(self, eps) -> np.ndarray:
        es = np.asarray(eps) * self.p_b / self.k
        ea = (1.0 - np.asarray(eps)) * self.p_b / self.n_b
        return np.log1p(es * self.a2 / (es * self.b2 + ea * self.v + self.sigma2))

    def secrecy(self, eps) -> np.ndarray:
        """Unclamped R_kk(eps) - R_ek(eps), the quantity the derivative
        formula differentiates."""
        return self.rate_lue(eps) - self.rate_eue(eps)


def pair_coefficients(channels, w: np.ndarray, v: np.ndarray, k: int, e: int,
                      p_b: float, sigma2: float) -> PowerCoefficients:
    """Measure the five power coefficients for pair (e, k) from channels."""
    gl = channels.lue_rows[k] @ w
    ge = channels.eue_rows[e] @ w
    pl = np.abs(gl) ** 2
    pe = np.abs(ge) ** 2
    return PowerCoefficients(
        a1=float(pl[k]), b1=float(pl.sum() - pl[k]),
        a2=float(pe[k]), b2=float(pe.sum() - pe[k]),
        v=float(np.linalg.norm(channels.eue_rows[e] @ v) ** 2),
        k=channels.k_lues, n_b=w.shape[0], p_b=p_b, sigma2=sigma2)


def secrecy_derivative(eps, coef: PowerCoefficients):
    """Closed-form dS_{e,k}/deps:

        K P_b [ A1 s2 / ((s2 K + B1 P eps)(s2 K + (A1+B1) P eps))
              - A2 N_b (s2 N_b + P V) /
                ((s2 K N_b + B2 N_b P eps + K P V (1-eps))
                 (s2 K N_b + (A2+B2) N_b P eps + K P V (1-eps))) ]
    """
    eps = np.asarray(eps, dtype=float)
    c = coef
    s2, p = c.sigma2, c.p_b
    t1 = c.a1 * s2 / ((s2 * c.k + c.b1 * p * eps)
                      * (s2 * c.k + (c.a1 + c.b1) * p * eps))
    d1 = s2 * c.k * c.n_b + c.b2 * c.n_b * p * eps + c.k * p * c.v * (1.0 - eps)
    d2 = (s2 * c.k * c.n_b + (c.a2 + c.b2) * c.n_b * p * eps
          + c.k * p * c.v * (1.0 - eps))
    t2 = c.a2 * c.n_b * (s2 * c.n_b + p * c.v) / (d1 * d2)
    return c.k * p * (t1 - t2)


def approx_roots(coef: PowerCoefficients):
    """High-SNR root approximation of dS/deps = 0:

        eps* = (-K V +/- sqrt(A2 N_b K V)) / (A2 N_b - K V)

    Returns (eps_plus, eps_minus); both None when the denominator is
    negligible relative to its terms (the approximation degenerates).
    """
    c = coef
    kv = c.k * c.v
    an = c.a2 * c.n_b
    den = an - kv
    if abs(den) <= 1e-12 * max(an, kv, 1e-300):
        return None, None
    root = math.sqrt(an * kv)
    return (-kv + root) / den, (-kv - root) / den


def golden_section(f, lo: float, hi: float, tol: float = 1e-6):
    """Maximize a unimodal f on [lo, hi]; returns (midpoint, iterations).

    Interval shrinks by (sqrt(5)-1)/2 per iteration with one new evaluation,
    so iterations <= ceil(ln(tol/(hi-lo)) / ln(0.618)) + 2.
    """
    if hi <= lo:
        raise ValueError("need hi > lo")
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    n = 0
    while b - a > tol:
        n += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b), n


@dataclass(frozen=True)
class EpsilonStep:
    """Outcome of one eps update."""

    epsilon: float
    pair: tuple | None
    iterations: int
    objective: float


def optimize_epsilon(channels, w: np.ndarray, v: np.ndarray, eps_current: float,
                     p_b: float, sigma2: float, mode: str = "s2",
                     eps_lo: float = 1e-3, tol: float = 1e-6,
                     override: float | None = None) -> EpsilonStep:
    """Golden-section eps update at frozen (W, V).

    mode "s2": find the bottleneck (e*, k*) at the current eps and maximize
    that pair's unclamped secrecy rate over [eps_lo, 1].
    mode "s1": maximize min_k R_kk(eps); with an exact null-space projector
    this is increasing in eps and lands at 1 (AN off), which is why callers
    normally pass an override in s1.
    An override short-circuits the search and is reported with 0 iterations.
    """
    from .precoding import PrecodingState

    if override is not None:
        if not 0.0 < override <= 1.0:
            raise ValueError(f"epsilon override must lie in (0, 1], got {override}")
        state = PrecodingState(w=w, v=v, epsilon=override, p_b=p_b)
        val, pair = min_secrecy_rate(channels, state, sigma2)
        return EpsilonStep(epsilon=float(override), pair=pair, iterations=0,
                           objective=val)

    if mode == "s2":
        state = PrecodingState(w=w, v=v, epsilon=eps_current, p_b=p_b)
        _, pair = min_secrecy_rate(channels, state, sigma2)
        coef = pair_coefficients(channels, w, v, pair[1], pair[0], p_b, sigma2)
        eps, n = golden_section(lambda x: float(coef.secrecy(x)), eps_lo, 1.0, tol)
        return EpsilonStep(epsilon=eps, pair=pair, iterations=n,
                           objective=float(coef.secrecy(eps)))

    if mode == "s1":
        gl = channels.lue_rows @ w
        pl = np.abs(gl) ** 2
        a1 = np.diag(pl).copy()
        b1 = pl.sum(axis=1) - a1
        kk = channels.k_lues

        def min_rate(eps):
            es = eps * p_b / kk
            return float(np.min(np.log1p(es * a1 / (es * b1 + sigma2))))

        eps, n = golden_section(min_rate, eps_lo, 1.0, tol)
        return EpsilonStep(epsilon=eps, pair=None, iterations=n,
                           objective=min_rate(eps))

    raise ValueError(f"unknown mode {mode!r}")

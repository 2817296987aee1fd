"""Bound validity, tightness, curvature, and gradient checks for the
secrecy-rate surrogates."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfsec.precoding import PrecodingState, null_space_an, rzf_init
from nfsec.rates import effective_noise, rate_tables
from nfsec.surrogates import (expansion_point, f1_lower, f1_lower_grad,
                              f2_upper, f2_upper_grad, pair_surrogate,
                              true_log_ratio)

from conftest import P0, SIGMA2, random_channelset


def _draw(rng, dim, scale):
    return scale * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


complex_st = st.builds(complex,
                       st.floats(-3, 3, allow_nan=False),
                       st.floats(-3, 3, allow_nan=False))


@settings(deadline=None, max_examples=120)
@given(seed=st.integers(0, 2**31), dim=st.integers(1, 5),
       logscale=st.floats(-2.0, 1.0), logs2=st.floats(-2.0, 1.0))
def test_lemma_sandwich(seed, dim, logscale, logs2):
    rng = np.random.default_rng(seed)
    s = 10.0 ** logscale
    sigma2 = 10.0 ** logs2
    g1, g1t = complex(_draw(rng, 1, s)[0]), complex(_draw(rng, 1, s)[0])
    g2, g2t = _draw(rng, dim, s), _draw(rng, dim, s)
    truth = true_log_ratio(g1, g2, sigma2)
    assert f1_lower(g1, g2, g1t, g2t, sigma2) <= truth + 1e-9
    assert truth <= f2_upper(g1, g2, g1t, g2t, sigma2) + 1e-9
    # tight at the expansion point
    tol = 1e-10 * max(1.0, abs(truth))
    t_t = true_log_ratio(g1t, g2t, sigma2)
    assert abs(f1_lower(g1t, g2t, g1t, g2t, sigma2) - t_t) <= tol
    assert abs(f2_upper(g1t, g2t, g1t, g2t, sigma2) - t_t) <= tol


def test_f1_concave_f2_convex(rng):
    """Midpoint test along random segments (exact concavity/convexity)."""
    for _ in range(40):
        dim = int(rng.integers(1, 5))
        s2 = float(10 ** rng.uniform(-2, 1))
        g1t, g2t = complex(_draw(rng, 1, 1)[0]), _draw(rng, dim, 1)
        a1, b1 = complex(_draw(rng, 1, 2)[0]), _draw(rng, dim, 2)
        a2, b2 = complex(_draw(rng, 1, 2)[0]), _draw(rng, dim, 2)
        mid1, mid2 = (a1 + a2) / 2, (b1 + b2) / 2
        lo = 0.5 * (f1_lower(a1, b1, g1t, g2t, s2)
                    + f1_lower(a2, b2, g1t, g2t, s2))
        assert f1_lower(mid1, mid2, g1t, g2t, s2) >= lo - 1e-12
        hi = 0.5 * (f2_upper(a1, b1, g1t, g2t, s2)
                    + f2_upper(a2, b2, g1t, g2t, s2))
        assert f2_upper(mid1, mid2, g1t, g2t, s2) <= hi + 1e-12


def _fd_grad(f, g1, g2, h=1e-7):
    """Central differences in all real coordinates, returned in the same
    (G1, G2) convention as the analytic gradients."""
    def bump1(dz):
        return f(g1 + dz, g2)

    def bump2(i, dz):
        g = g2.copy()
        g[i] += dz
        return f(g1, g)

    d1 = ((bump1(h) - bump1(-h)) + 1j * (bump1(1j * h) - bump1(-1j * h))) / (4 * h)
    d2 = np.empty_like(g2)
    for i in range(g2.size):
        d2[i] = ((bump2(i, h) - bump2(i, -h))
                 + 1j * (bump2(i, 1j * h) - bump2(i, -1j * h))) / (4 * h)
    return d1, d2


def test_gradients_match_fd(rng):
    for _ in range(15):
        dim = int(rng.integers(1, 4))
        s2 = float(10 ** rng.uniform(-1, 0.5))
        g1t, g2t = complex(_draw(rng, 1, 1)[0]), _draw(rng, dim, 1)
        g1, g2 = complex(_draw(rng, 1, 1)[0]), _draw(rng, dim, 1)

        # df = 2 Re[conj(G) dg] makes G = (df/dx + i df/dy)/2, which is
        # exactly the central-difference quotient below
        a1, a2 = f1_lower_grad(g1, g2, g1t, g2t, s2)
        n1, n2 = _fd_grad(lambda x, y: f1_lower(x, y, g1t, g2t, s2), g1, g2)
        assert a1 == pytest.approx(n1, rel=2e-6, abs=1e-9)
        np.testing.assert_allclose(a2, n2, rtol=2e-6, atol=1e-9)

        b1, b2 = f2_upper_grad(g1, g2, g1t, g2t, s2)
        m1, m2 = _fd_grad(lambda x, y: f2_upper(x, y, g1t, g2t, s2), g1, g2)
        assert b1 == pytest.approx(m1, rel=2e-6, abs=1e-9)
        np.testing.assert_allclose(b2, m2, rtol=2e-6, atol=1e-9)


def test_pair_surrogate_tight_at_expansion(rng):
    """At W_t the surrogate equals the true unclamped secrecy margin, and
    the rate-only variant equals the LUE rate."""
    ch = random_channelset(rng, n_b=7, k=2, e=2)
    w_t = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    state = PrecodingState(w=w_t, v=v, epsilon=0.6, p_b=P0)
    s2_lue = [effective_noise(r, state, SIGMA2, False) for r in ch.lue_rows]
    s2_eue = [effective_noise(r, state, SIGMA2, True) for r in ch.eue_rows]
    pt = expansion_point(ch, w_t, s2_lue, s2_eue)
    r_kk, r_ek = rate_tables(ch, state, SIGMA2)
    for k in range(2):
        assert pair_surrogate(pt, w_t, k, None) == pytest.approx(
            r_kk[k], rel=1e-9)
        for e in range(2):
            assert pair_surrogate(pt, w_t, k, e) == pytest.approx(
                r_kk[k] - r_ek[e, k], rel=1e-9, abs=1e-12)


def test_pair_surrogate_is_lower_bound(rng):
    """Away from W_t the surrogate can only underestimate the margin."""
    ch = random_channelset(rng, n_b=7, k=2, e=2)
    w_t = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    state = PrecodingState(w=w_t, v=v, epsilon=0.6, p_b=P0)
    s2_lue = [effective_noise(r, state, SIGMA2, False) for r in ch.lue_rows]
    s2_eue = [effective_noise(r, state, SIGMA2, True) for r in ch.eue_rows]
    pt = expansion_point(ch, w_t, s2_lue, s2_eue)
    for _ in range(20):
        w = w_t + 0.3 * _draw(rng, w_t.shape, np.linalg.norm(w_t) / 5)
        state_w = PrecodingState(w=w, v=v, epsilon=0.6, p_b=P0)
        r_kk, r_ek = rate_tables(ch, state_w, SIGMA2)
        for k in range(2):
            for e in range(2):
                sur = pair_surrogate(pt, w, k, e)
                assert sur <= r_kk[k] - r_ek[e, k] + 1e-9

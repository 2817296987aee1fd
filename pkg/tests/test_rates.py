import numpy as np
import pytest

from nfsec import ChannelSet, PrecodingState
from nfsec.precoding import null_space_an, rzf_init
from nfsec.rates import (NATS_TO_BITS, effective_noise, min_secrecy_rate,
                         rate, rate_direct, rate_tables, secrecy_rate,
                         secrecy_table)

from conftest import P0, SIGMA2, random_channelset


def test_nats_to_bits_constant():
    assert NATS_TO_BITS == pytest.approx(1.4426950408889634, rel=1e-12)


def _state_for(ch, eps=0.7):
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    return PrecodingState(w=w, v=v, epsilon=eps, p_b=P0)


def test_rate_two_forms_agree(rng):
    """Compact (divide-by-eps_s) and explicit power-weighted forms."""
    for trial in range(25):
        ch = random_channelset(rng, n_b=7, k=3, e=2)
        st = _state_for(ch, eps=float(rng.uniform(0.05, 1.0)))
        for k in range(3):
            for row, is_eue in ((ch.lue_rows[k], False), (ch.eue_rows[0], True),
                                (ch.eue_rows[1], True)):
                a = rate(row, k, st, SIGMA2, is_eue=is_eue).rate_nats
                b = rate_direct(row, k, st, SIGMA2, is_eue=is_eue)
                assert a == pytest.approx(b, rel=1e-12)


def test_effective_noise_an_only_for_eues(rng):
    ch = random_channelset(rng, n_b=6, k=2, e=1)
    st = _state_for(ch, eps=0.5)
    row = ch.eue_rows[0]
    assert effective_noise(row, st, SIGMA2, is_eue=False) == pytest.approx(
        SIGMA2 / st.eps_s, rel=1e-12)
    with_an = effective_noise(row, st, SIGMA2, is_eue=True)
    an = np.linalg.norm(row @ st.v) ** 2
    assert with_an == pytest.approx((st.eps_a * an + SIGMA2) / st.eps_s,
                                    rel=1e-12)


def test_tables_match_scalar_path(rng):
    ch = random_channelset(rng, n_b=8, k=3, e=2)
    st = _state_for(ch, eps=0.4)
    r_kk, r_ek = rate_tables(ch, st, SIGMA2)
    assert r_kk.shape == (3,) and r_ek.shape == (2, 3)
    for k in range(3):
        assert r_kk[k] == pytest.approx(
            rate(ch.lue_rows[k], k, st, SIGMA2, False).rate_nats, rel=1e-12)
        for e in range(2):
            assert r_ek[e, k] == pytest.approx(
                rate(ch.eue_rows[e], k, st, SIGMA2, True).rate_nats, rel=1e-12)
            s = secrecy_rate(ch, k, e, st, SIGMA2)
            assert s == pytest.approx(max(0.0, r_kk[k] - r_ek[e, k]), abs=1e-15)
    tab = secrecy_table(ch, st, SIGMA2)
    np.testing.assert_allclose(tab, np.maximum(0.0, r_kk[None, :] - r_ek),
                               atol=1e-15)
    assert np.all(tab >= 0)


def test_min_secrecy_argmin_and_ties(rng):
    ch = random_channelset(rng, n_b=6, k=2, e=2)
    st = _state_for(ch)
    val, (e, k) = min_secrecy_rate(ch, st, SIGMA2)
    tab = secrecy_table(ch, st, SIGMA2)
    assert val == tab[e, k] == tab.min()
    # duplicated EUE rows tie; lexicographic argmin takes the first
    ch2 = ChannelSet(lue_rows=ch.lue_rows,
                     eue_rows=np.vstack([ch.eue_rows[0], ch.eue_rows[0]]))
    _, pair = min_secrecy_rate(ch2, _state_for(ch2), SIGMA2)
    assert pair[0] == 0


def test_zero_eues_mean_min_rate(rng):
    """With the eavesdroppers silenced the min secrecy rate is the min rate."""
    ch = random_channelset(rng, n_b=6, k=3, e=2)
    ch0 = ChannelSet(lue_rows=ch.lue_rows,
                     eue_rows=np.zeros_like(ch.eue_rows))
    st = _state_for(ch0, eps=0.8)
    val, _ = min_secrecy_rate(ch0, st, SIGMA2)
    r_kk, r_ek = rate_tables(ch0, st, SIGMA2)
    assert np.all(r_ek == 0)
    assert val == pytest.approx(float(r_kk.min()), rel=1e-12)


def test_rate_monotone_in_signal_power(rng):
    """At eps=1 (no AN) every LUE rate grows with P_b."""
    ch = random_channelset(rng, n_b=6, k=2, e=1)
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    r_lo, _ = rate_tables(ch, PrecodingState(w, v, 1.0, P0), SIGMA2)
    r_hi, _ = rate_tables(ch, PrecodingState(w, v, 1.0, 100 * P0), SIGMA2)
    assert np.all(r_hi > r_lo)

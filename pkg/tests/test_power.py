import numpy as np
import pytest

from nfsec.power import (PowerCoefficients, approx_roots, golden_section,
                         optimize_epsilon, pair_coefficients,
                         secrecy_derivative)
from nfsec.precoding import PrecodingState, null_space_an, rzf_init
from nfsec.rates import min_secrecy_rate, rate_direct, rate_tables

from conftest import P0, SIGMA2, random_channelset


def _physical_coef(rng):
    """Coefficient draws at roughly the scales channels actually produce
    (|h^H w|^2 ~ beta*N_b ~ 1e-5), so the derivative check is meaningful."""
    mag = lambda: float(10 ** rng.uniform(-7, -4))
    return PowerCoefficients(
        a1=mag(), b1=mag() * rng.uniform(0, 0.5), a2=mag(),
        b2=mag() * rng.uniform(0, 0.5), v=mag() * rng.uniform(0.1, 2.0),
        k=int(rng.integers(1, 5)), n_b=int(rng.choice([16, 81])),
        p_b=P0, sigma2=SIGMA2)


def test_secrecy_derivative_matches_fd(rng):
    eps_grid = np.arange(0.1, 1.0, 0.1)
    h = 1e-6
    for _ in range(50):
        c = _physical_coef(rng)
        for eps in eps_grid:
            fd = (c.secrecy(eps + h) - c.secrecy(eps - h)) / (2 * h)
            an = float(secrecy_derivative(eps, c))
            assert an == pytest.approx(fd, rel=1e-4, abs=1e-10)


def test_coefficients_reproduce_rates(rng):
    """PowerCoefficients.rate_* must agree with the generic rate evaluation
    at any eps, for coefficients measured off real channels."""
    ch = random_channelset(rng, n_b=7, k=3, e=2)
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    for eps in (0.2, 0.55, 1.0):
        state = PrecodingState(w=w, v=v, epsilon=eps, p_b=P0)
        for k in range(3):
            for e in range(2):
                c = pair_coefficients(ch, w, v, k, e, P0, SIGMA2)
                assert float(c.rate_lue(eps)) == pytest.approx(
                    rate_direct(ch.lue_rows[k], k, state, SIGMA2, False),
                    rel=1e-12)
                assert float(c.rate_eue(eps)) == pytest.approx(
                    rate_direct(ch.eue_rows[e], k, state, SIGMA2, True),
                    rel=1e-12)


def test_approx_roots_value_and_degenerate():
    c = PowerCoefficients(a1=1.0, b1=0.0, a2=1.0, b2=0.0, v=1.0,
                          k=2, n_b=100, p_b=1.0, sigma2=1e-9)
    plus, minus = approx_roots(c)
    assert plus == pytest.approx((-2 + np.sqrt(200.0)) / 98.0, rel=1e-12)
    assert plus == pytest.approx(0.12390, abs=1e-5)
    assert minus < 0
    # A2 N_b == K V kills the denominator
    c2 = PowerCoefficients(a1=1.0, b1=0.0, a2=1.0, b2=0.0, v=50.0,
                           k=2, n_b=100, p_b=1.0, sigma2=1e-9)
    assert approx_roots(c2) == (None, None)


def test_golden_section_quadratic():
    f = lambda x: -(x - 0.3) ** 2
    x, n = golden_section(f, 0.0, 1.0, tol=1e-8)
    assert x == pytest.approx(0.3, abs=1e-7)
    # iteration bound from the fixed shrink factor
    bound = int(np.ceil(np.log(1e-8) / np.log((np.sqrt(5) - 1) / 2))) + 2
    assert n <= bound
    with pytest.raises(ValueError):
        golden_section(f, 1.0, 1.0)


def test_golden_section_against_grid(rng):
    """GSS argmax agrees with a dense grid scan of a real pair's secrecy."""
    ch = random_channelset(rng, n_b=9, k=2, e=1)
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    c = pair_coefficients(ch, w, v, 0, 0, P0, SIGMA2)
    eps, _ = golden_section(lambda x: float(c.secrecy(x)), 1e-3, 1.0, 1e-6)
    grid = np.linspace(1e-3, 1.0, 200001)
    best = grid[int(np.argmax(c.secrecy(grid)))]
    # value gap at a boundary argmax is O(slope * x-tol), not zero
    f_best = float(c.secrecy(best))
    assert float(c.secrecy(eps)) >= f_best - 1e-6 * max(1.0, abs(f_best))


def test_optimize_epsilon_override(rng):
    ch = random_channelset(rng, n_b=6, k=2, e=2)
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    step = optimize_epsilon(ch, w, v, 0.5, P0, SIGMA2, override=0.37)
    assert step.epsilon == 0.37
    assert step.iterations == 0
    state = PrecodingState(w=w, v=v, epsilon=0.37, p_b=P0)
    val, pair = min_secrecy_rate(ch, state, SIGMA2)
    assert step.objective == pytest.approx(val)
    assert step.pair == pair
    with pytest.raises(ValueError):
        optimize_epsilon(ch, w, v, 0.5, P0, SIGMA2, override=1.5)
    with pytest.raises(ValueError):
        optimize_epsilon(ch, w, v, 0.5, P0, SIGMA2, mode="s3")


def test_optimize_epsilon_s1_saturates(rng):
    """Rate-only objective is increasing in eps (AN never hits LUEs), so
    the s1 search runs to the upper edge."""
    ch = random_channelset(rng, n_b=6, k=2, e=1)
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    step = optimize_epsilon(ch, w, v, 0.5, P0, SIGMA2, mode="s1")
    assert step.epsilon >= 1.0 - 5e-6
    assert step.pair is None


def test_optimize_epsilon_s2_beats_endpoints(rng):
    ch = random_channelset(rng, n_b=8, k=2, e=2)
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    step = optimize_epsilon(ch, w, v, 0.5, P0, SIGMA2, mode="s2")
    e, k = step.pair
    c = pair_coefficients(ch, w, v, k, e, P0, SIGMA2)
    assert step.objective >= float(c.secrecy(0.001)) - 1e-9
    assert step.objective >= float(c.secrecy(1.0)) - 1e-9

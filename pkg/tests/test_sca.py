"""Subproblem construction and the inner ascent solver."""
import numpy as np
import pytest

from nfsec._core import objective_and_grad, pair_values, softmin
from nfsec.precoding import PrecodingState, null_space_an, rzf_init
from nfsec.rates import rate_tables
from nfsec.sca import (ScaOptions, build_problem, reduced_basis, scaled_rows,
                       solve_subproblem)

from conftest import P0, SIGMA2, random_channelset


def _setup(rng, n_b=9, k=2, e=2, eps=0.6):
    ch = random_channelset(rng, n_b=n_b, k=k, e=e)
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    state = PrecodingState(w=w, v=v, epsilon=eps, p_b=P0)
    return ch, state


def test_reduced_basis_orthonormal_and_spanning(rng):
    ch, _ = _setup(rng, n_b=12, k=3, e=2)
    q = reduced_basis(ch)
    r = q.shape[1]
    assert r <= 5
    np.testing.assert_allclose(q.conj().T @ q, np.eye(r), atol=1e-10)
    for row in ch.all_rows:
        h = row.conj()
        resid = h - q @ (q.conj().T @ h)
        assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(h)


def test_scaled_rows_unit_noise(rng):
    """After scaling, SINRs against noise 1 must match the physical rates."""
    ch, state = _setup(rng)
    rows_sc = scaled_rows(ch, state, SIGMA2)
    r = rows_sc @ state.w
    k = ch.k_lues
    p = np.abs(r) ** 2
    sinr_scaled = p[0, 0] / (p[0].sum() - p[0, 0] + 1.0)
    r_kk, r_ek = rate_tables(ch, state, SIGMA2)
    assert np.log1p(sinr_scaled) == pytest.approx(r_kk[0], rel=1e-10)
    sinr_e = p[k, 0] / (p[k].sum() - p[k, 0] + 1.0)
    assert np.log1p(sinr_e) == pytest.approx(r_ek[0, 0], rel=1e-10)


def test_build_problem_tight_at_expansion(rng):
    """pair_values at Y0 equals the true unclamped margins at W_t."""
    ch, state = _setup(rng)
    q = reduced_basis(ch)
    rows_sc = scaled_rows(ch, state, SIGMA2)
    prob, y0, pairs = build_problem(rows_sc, q, state.w, ch.k_lues, "s2")
    g = pair_values(prob, prob.m @ y0)
    r_kk, r_ek = rate_tables(ch, state, SIGMA2)
    for val, (e, k) in zip(g, pairs):
        assert val == pytest.approx(r_kk[k] - r_ek[e, k], rel=1e-8,
                                    abs=1e-10)
    assert len(pairs) == ch.k_lues * ch.e_eues
    # s1 drops the eavesdropper terms
    prob1, y01, pairs1 = build_problem(rows_sc, q, state.w, ch.k_lues, "s1")
    g1 = pair_values(prob1, prob1.m @ y01)
    assert pairs1 == [(None, k) for k in range(ch.k_lues)]
    for val, (_, k) in zip(g1, pairs1):
        assert val == pytest.approx(r_kk[k], rel=1e-8)


def test_softmin_bounds(rng):
    g = rng.standard_normal(6)
    for tau in (1.0, 0.1, 1e-3):
        sm, wts = softmin(g, tau)
        assert sm <= g.min() + 1e-12
        assert sm >= g.min() - tau * np.log(len(g))
        assert wts.sum() == pytest.approx(1.0)


def test_kernel_gradient_fd(rng):
    ch, state = _setup(rng, n_b=8, k=2, e=1)
    q = reduced_basis(ch)
    rows_sc = scaled_rows(ch, state, SIGMA2)
    prob, y0, _ = build_problem(rows_sc, q, state.w, ch.k_lues, "s2")
    tau = 0.1
    _, _, grad = objective_and_grad(prob, y0, tau)
    h = 1e-5   # F ~ 10 here; smaller steps drown in cancellation
    for _ in range(8):
        i = rng.integers(y0.shape[0])
        j = rng.integers(y0.shape[1])
        for dz in (h, 1j * h):
            yp = y0.copy(); yp[i, j] += dz
            ym = y0.copy(); ym[i, j] -= dz
            fd = (objective_and_grad(prob, yp, tau)[0]
                  - objective_and_grad(prob, ym, tau)[0]) / (2 * h)
            # kernel pairing: dF ~ Re[conj(grad) dy], no factor 2
            want = np.real(np.conj(grad[i, j]) * dz) / h
            assert fd == pytest.approx(want, rel=5e-5, abs=1e-8)


def test_solve_subproblem_improves_and_feasible(rng):
    ch, state = _setup(rng, n_b=10, k=3, e=2)
    res = solve_subproblem(ch, state, SIGMA2, mode="s2")
    assert res.xi >= res.xi_start - 1e-9
    assert np.linalg.norm(res.w) ** 2 <= ch.k_lues + 1e-6
    assert res.g.shape == (len(res.pairs),)
    assert res.xi == pytest.approx(float(res.g.min()))
    # margins reported against the true channels at the new W
    state_new = PrecodingState(w=res.w, v=state.v, epsilon=state.epsilon,
                               p_b=state.p_b)
    r_kk, r_ek = rate_tables(ch, state_new, SIGMA2)
    truth = np.array([r_kk[k] - r_ek[e, k] for (e, k) in res.pairs])
    np.testing.assert_allclose(res.g, truth, rtol=1e-7, atol=1e-10)


def test_solve_subproblem_fixed_point(rng):
    """Re-solving from a converged iterate must not move materially."""
    ch, state = _setup(rng, n_b=8, k=2, e=2)
    # this instance needs more re-linearizations than the runtime default
    opts = ScaOptions(max_rounds=500)
    res1 = solve_subproblem(ch, state, SIGMA2, mode="s2", opts=opts)
    assert res1.converged
    state2 = PrecodingState(w=res1.w, v=state.v, epsilon=state.epsilon,
                            p_b=state.p_b)
    res2 = solve_subproblem(ch, state2, SIGMA2, mode="s2", opts=opts)
    assert res2.xi >= res1.xi - 1e-9
    assert res2.xi - res1.xi <= 1e-4 * max(1.0, abs(res1.xi))


def test_solve_subproblem_s1(rng):
    ch, state = _setup(rng, n_b=8, k=3, e=1)
    res = solve_subproblem(ch, state, SIGMA2, mode="s1")
    assert res.pairs == [(None, k) for k in range(3)]
    assert res.xi >= res.xi_start - 1e-9


def test_sca_options_defaults():
    opts = ScaOptions()
    assert opts.tau_schedule[0] == 1.0
    assert opts.tau_schedule[-1] == pytest.approx(1e-3)
    assert opts.max_rounds >= 1

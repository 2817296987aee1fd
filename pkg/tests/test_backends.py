"""Parity between the compiled kernel and the pure-python fallback."""
import os
import subprocess
import sys

import numpy as np
import pytest

from nfsec._core import BACKEND, solve_ascent, solve_ascent_with
from nfsec.precoding import PrecodingState, null_space_an, rzf_init
from nfsec.sca import build_problem, reduced_basis, scaled_rows

from conftest import P0, SIGMA2, random_channelset

HAVE_COMPILED = BACKEND == "compiled"
TAUS = np.array([1.0, 0.1, 0.01, 1e-3])


def _problem(seed, n_b=9, k=2, e=2):
    rng = np.random.default_rng(seed)
    ch = random_channelset(rng, n_b=n_b, k=k, e=e)
    w = rzf_init(ch.h_b, SIGMA2)
    v = null_space_an(ch.h_b)
    state = PrecodingState(w=w, v=v, epsilon=0.6, p_b=P0)
    rows_sc = scaled_rows(ch, state, SIGMA2)
    q = reduced_basis(ch)
    return build_problem(rows_sc, q, w, k, "s2")


def test_backend_value():
    assert BACKEND in ("compiled", "python")


@pytest.mark.skipif(not HAVE_COMPILED, reason="extension not built")
def test_backends_agree():
    for seed in range(8):
        prob, y0, _ = _problem(seed)
        a = solve_ascent_with("python", prob, y0, TAUS)
        b = solve_ascent_with("compiled", prob, y0, TAUS)
        assert a.xi == pytest.approx(b.xi, rel=1e-8, abs=1e-11)
        # iterates drift at rounding level between the float pipelines
        np.testing.assert_allclose(a.y, b.y, rtol=1e-4, atol=1e-8)
        np.testing.assert_allclose(a.g, b.g, rtol=1e-6, atol=1e-10)
        assert a.converged == b.converged


def test_default_dispatch_matches_explicit():
    prob, y0, _ = _problem(99)
    a = solve_ascent(prob, y0, TAUS)
    b = solve_ascent_with(BACKEND, prob, y0, TAUS)
    assert a.xi == b.xi
    np.testing.assert_array_equal(a.y, b.y)


def test_unknown_backend_rejected():
    prob, y0, _ = _problem(1)
    with pytest.raises(ValueError):
        solve_ascent_with("fortran", prob, y0, TAUS)


def test_env_var_forces_python_backend():
    env = dict(os.environ, NFSEC_BACKEND="python")
    out = subprocess.run(
        [sys.executable, "-c", "from nfsec._core import BACKEND; print(BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"

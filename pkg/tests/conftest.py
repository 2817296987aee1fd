"""Shared fixtures: small scenarios that keep the unit tests fast.

The 3x3 and 5x5 apertures are far-field at the distances used, which is
fine for machinery tests; the physics-sensitive checks live in
test_acceptance.py at the full desk scale.
"""
import numpy as np
import pytest

from nfsec import (PrecodingState, ScenarioConfig, build_channels,
                   generate_scenario, null_space_an)
from nfsec.precoding import rzf_init

SIGMA2 = 10.0 ** (-96.0 / 10.0) * 1e-3
P0 = 1e-3


def tiny_config(**kw) -> ScenarioConfig:
    base = dict(n_x=3, n_z=3, k_lues=2, e_eues=2,
                lue_distance=(8.0, 20.0), min_theta_sep=0.7)
    base.update(kw)
    return ScenarioConfig(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_scenario():
    return generate_scenario(tiny_config(), seed=7)


@pytest.fixture
def tiny_channels(tiny_scenario):
    return build_channels(tiny_scenario)


@pytest.fixture
def tiny_state(tiny_channels):
    w = rzf_init(tiny_channels.h_b, SIGMA2)
    v = null_space_an(tiny_channels.h_b)
    return PrecodingState(w=w, v=v, epsilon=0.6, p_b=P0)


def random_channelset(rng, n_b=6, k=2, e=2, scale=1e-3):
    """Gaussian stand-in rows at a controlled magnitude."""
    from nfsec import ChannelSet
    shape = (k + e, n_b)
    rows = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return ChannelSet(lue_rows=rows[:k], eue_rows=rows[k:])

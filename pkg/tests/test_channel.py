import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfsec.channel import (ScenarioConfig, build_channels, generate_scenario,
                           los_channel, nlos_channel, path_gain, path_loss_db,
                           placement_from_xy)
from nfsec.geometry import ArrayGeometry, UePlacement, array_response

from conftest import tiny_config

LAM = 0.15


def test_path_loss_values():
    assert path_loss_db(1.0) == pytest.approx(-33.05)
    assert path_loss_db(10.0) == pytest.approx(-33.05 - 36.7)
    assert path_gain(1.0) == pytest.approx(10 ** (-3.305))
    with pytest.raises(ValueError):
        path_loss_db(0.0)
    with pytest.raises(ValueError):
        path_loss_db(-3.0)


@settings(deadline=None, max_examples=40)
@given(theta=st.floats(0.0, 2 * np.pi, exclude_max=True),
       d=st.floats(1.0, 80.0))
def test_los_norm_is_beta_nb(theta, d):
    geom = ArrayGeometry(5, 5, LAM)
    ue = UePlacement(theta=theta, phi=np.pi / 2, distance=d)
    h = los_channel(geom, ue)
    expected = path_gain(d) * geom.n_elements
    assert np.linalg.norm(h) ** 2 == pytest.approx(expected, rel=1e-9)


def test_los_phase_and_farfield():
    geom = ArrayGeometry(3, 3, LAM)
    ue = UePlacement(theta=3.8, phi=np.pi / 2, distance=7.0)
    h = los_channel(geom, ue)
    ratio = h / array_response(geom, ue)
    expect = np.sqrt(path_gain(7.0)) * np.exp(-2j * np.pi * 7.0 / LAM)
    np.testing.assert_allclose(ratio, expect, rtol=1e-12)
    # far_field keeps beta and carrier phase, swaps the response
    hf = los_channel(geom, ue, far_field=True)
    np.testing.assert_allclose(
        hf / array_response(geom, ue, far_field=True), expect, rtol=1e-12)


def test_nlos_empty_and_span():
    geom = ArrayGeometry(3, 3, LAM)
    ue = UePlacement(theta=4.0, phi=np.pi / 2, distance=9.0)
    assert np.all(nlos_channel(geom, ue) == 0)
    with pytest.raises(ValueError):
        nlos_channel(geom, ue, scatterers=[ue])  # rng required
    rng = np.random.default_rng(0)
    sc = UePlacement(theta=3.6, phi=np.pi / 2, distance=5.0)
    h = nlos_channel(geom, ue, scatterers=[sc], rng=rng)
    # single path: must be a scalar multiple of the scatterer response
    ratio = h / array_response(geom, sc)
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-10)


def test_placement_from_xy():
    p = placement_from_xy((50.0, 100.0), (50.0, 90.0))
    assert p.distance == pytest.approx(10.0)
    assert p.theta == pytest.approx(3 * np.pi / 2)
    assert p.phi == pytest.approx(np.pi / 2)


def test_generate_scenario_determinism():
    cfg = tiny_config()
    s1 = generate_scenario(cfg, seed=3)
    s2 = generate_scenario(cfg, seed=3)
    np.testing.assert_array_equal(s1.lue_xy, s2.lue_xy)
    np.testing.assert_array_equal(s1.eue_xy, s2.eue_xy)
    s3 = generate_scenario(cfg, seed=4)
    assert not np.array_equal(s1.lue_xy, s3.lue_xy)


def test_scenario_geometry_constraints():
    cfg = tiny_config(k_lues=3, e_eues=3)
    for seed in range(6):
        sc = generate_scenario(cfg, seed)
        lo, hi = cfg.lue_distance
        for ue in sc.lues:
            assert lo <= ue.distance <= hi
        for xy in np.vstack([sc.lue_xy, sc.eue_xy]):
            assert 0 <= xy[0] <= cfg.cell[0]
            assert 0 <= xy[1] <= cfg.cell[1]
        thetas = [u.theta for u in sc.lues]
        for i in range(len(thetas)):
            for j in range(i + 1, len(thetas)):
                gap = abs(np.angle(np.exp(1j * (thetas[i] - thetas[j]))))
                assert gap >= cfg.min_theta_sep
        # collinear EUEs share direction with their paired LUE at half range
        for i, eue in enumerate(sc.eues):
            ref = sc.lues[i % cfg.k_lues]
            assert eue.theta == ref.theta
            assert eue.distance == pytest.approx(ref.distance * cfg.eue_ratio)


def test_non_collinear_sampling():
    cfg = tiny_config(collinear=False)
    sc = generate_scenario(cfg, seed=11)
    ratios = [e.distance / l.distance for e, l in zip(sc.eues, sc.lues)]
    assert not np.allclose(ratios, cfg.eue_ratio)


def test_build_channels_shapes_and_h_b(tiny_scenario):
    ch = build_channels(tiny_scenario)
    n_b = tiny_scenario.geom.n_elements
    assert ch.lue_rows.shape == (2, n_b)
    assert ch.eue_rows.shape == (2, n_b)
    assert ch.k_lues == 2 and ch.e_eues == 2 and ch.n_elements == n_b
    np.testing.assert_array_equal(ch.h_b, ch.lue_rows.conj().T)
    np.testing.assert_array_equal(ch.all_rows,
                                  np.vstack([ch.lue_rows, ch.eue_rows]))
    # row u is h_u^H for the scenario's placements
    expect = los_channel(tiny_scenario.geom, tiny_scenario.lues[0])
    np.testing.assert_allclose(ch.lue_rows[0], expect, rtol=1e-12)


def test_build_channels_nlos_deterministic(tiny_scenario):
    a = build_channels(tiny_scenario, nlos_paths=2)
    b = build_channels(tiny_scenario, nlos_paths=2)
    np.testing.assert_array_equal(a.lue_rows, b.lue_rows)
    c = build_channels(tiny_scenario, nlos_paths=2, seed=99)
    assert not np.array_equal(a.lue_rows, c.lue_rows)


def test_sampler_guard():
    cfg = tiny_config(k_lues=4, min_theta_sep=1.5)   # cannot fit 4 users
    with pytest.raises(RuntimeError):
        generate_scenario(cfg, seed=0)


def test_default_config_matches_contract():
    cfg = ScenarioConfig()
    assert (cfg.n_x, cfg.n_z) == (9, 9)
    assert cfg.k_lues == 4 and cfg.e_eues == 4
    assert cfg.lue_distance == (10.0, 30.0)
    assert cfg.eue_ratio == 0.5 and cfg.collinear
    assert cfg.wavelength == pytest.approx(0.15)
    assert cfg.p_b == pytest.approx(1e-3)          # 0 dBm
    assert cfg.sigma2 == pytest.approx(10 ** (-9.6) * 1e-3)

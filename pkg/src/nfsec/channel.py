"""LoS-dominant near-field channels, user placement, and scenario sampling.

Channel vectors are stored in row form: row u holds h_u^H, so the received
signal projection is simply rows @ W. The stacked LUE matrix H_b (column k
equal to the channel column vector h_kb) is exposed as a property.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, UePlacement, array_response


def path_loss_db(distance_m) -> np.ndarray:
    """Large-scale fading in dB at distance d meters: -33.05 - 36.7 log10(d)."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return -33.05 - 36.7 * np.log10(d)


def path_gain(distance_m) -> np.ndarray:
    """Linear power gain beta = 10^(PL_dB/10)."""
    return 10.0 ** (path_loss_db(distance_m) / 10.0)


def los_channel(geom: ArrayGeometry, ue: UePlacement,
                far_field: bool = False) -> np.ndarray:
    """LoS channel row h^H = sqrt(beta) exp(-j 2pi d/lambda) a(theta, phi, d).

    Norm equals sqrt(beta * N_b). far_field=True drops the quadratic phase
    terms of the array response (the carrier phase and beta still use the
    true distance).
    """
    beta = path_gain(ue.distance)
    carrier = np.exp(-2j * np.pi * ue.distance / geom.wavelength)
    return np.sqrt(beta) * carrier * array_response(geom, ue, far_field=far_field)


def nlos_channel(geom: ArrayGeometry, ue: UePlacement, scatterers=(),
                 rng: np.random.Generator | None = None) -> np.ndarray:
    """Scattered component: sum of complex Gaussian gains times the array
    response at each scatterer placement. Gain variance per path is the
    scatterer path gain divided by the number of paths. Empty scatterer list
    returns the zero vector. This is a configurable stand-in kept off by
    default; headline results are LoS-only.
    """
    out = np.zeros(geom.n_elements, dtype=complex)
    scatterers = tuple(scatterers)
    if not scatterers:
        return out
    if rng is None:
        raise ValueError("nlos_channel needs an rng when scatterers are given")
    num = len(scatterers)
    for sc in scatterers:
        var = path_gain(sc.distance) / num
        g = np.sqrt(var / 2.0) * (rng.standard_normal() + 1j * rng.standard_normal())
        out += g * array_response(geom, sc)
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for random scenario generation (desk-scale defaults).

    Defaults: 9x9 half-wavelength UPA, K=E=4, LUEs drawn at 10-30 m,
    each EUE collinear with an LUE at half its distance. Note the 9x9
    aperture at 2 GHz has a Rayleigh distance of ~9.6 m, so distance-domain
    selectivity at these ranges is mild; bump n_x/n_z (e.g. 31x31 gives
    ~135 m) to study the deep near-field regime.
    """

    n_x: int = 9
    n_z: int = 9
    wavelength: float = 0.15
    k_lues: int = 4
    e_eues: int = 4
    cell: tuple = (100.0, 100.0)
    bs_xy: tuple = (50.0, 100.0)
    lue_distance: tuple = (10.0, 30.0)
    eue_ratio: float = 0.5
    collinear: bool = True
    nlos_paths: int = 0
    min_theta_sep: float = 0.25   # ~ one 9x9 beamwidth; keeps the LUE gram well conditioned
    p_b: float = 1e-3                   # 0 dBm
    sigma2: float = 10.0 ** (-96.0 / 10.0) * 1e-3   # -96 dBm

    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.n_x, self.n_z, self.wavelength)


@dataclass(frozen=True)
class Scenario:
    """One sampled drop: BS array, LUE/EUE placements, and link budget."""

    geom: ArrayGeometry
    bs_xy: tuple
    lues: tuple
    eues: tuple
    lue_xy: np.ndarray
    eue_xy: np.ndarray
    cell: tuple = (100.0, 100.0)
    p_b: float = 1e-3
    sigma2: float = 10.0 ** (-96.0 / 10.0) * 1e-3
    nlos_paths: int = 0
    seed: int = 0


@dataclass(frozen=True)
class ChannelSet:
    """Channel rows (h^H) for all users of one scenario."""

    lue_rows: np.ndarray  # (K, N_b)
    eue_rows: np.ndarray  # (E, N_b)

    @property
    def n_elements(self) -> int:
        return self.lue_rows.shape[1]

    @property
    def k_lues(self) -> int:
        return self.lue_rows.shape[0]

    @property
    def e_eues(self) -> int:
        return self.eue_rows.shape[0]

    @property
    def h_b(self) -> np.ndarray:
        """Stacked LUE matrix, N_b x K, column k = channel column h_kb."""
        return self.lue_rows.conj().T

    @property
    def all_rows(self) -> np.ndarray:
        """LUE rows then EUE rows, (K+E) x N_b."""
        return np.vstack([self.lue_rows, self.eue_rows])


def placement_from_xy(bs_xy, xy) -> UePlacement:
    """Ground-plane position to BS-centric (theta, phi=pi/2, d)."""
    dx = xy[0] - bs_xy[0]
    dy = xy[1] - bs_xy[1]
    d = float(np.hypot(dx, dy))
    theta = float(np.mod(np.arctan2(dy, dx), 2.0 * np.pi))
    return UePlacement(theta=theta, phi=np.pi / 2.0, distance=d)


def _sample_lue_positions(cfg: ScenarioConfig, rng: np.random.Generator):
    """Distances uniform in the configured band, azimuth uniform into the
    cell, rejected until inside the cell with pairwise angular separation."""
    lo, hi = cfg.lue_distance
    thetas, xys = [], []
    guard = 0
    while len(xys) < cfg.k_lues:
        guard += 1
        if guard > 10000:
            raise RuntimeError("scenario sampling failed; loosen the config")
        d = rng.uniform(lo, hi)
        th = rng.uniform(np.pi, 2.0 * np.pi)
        x = cfg.bs_xy[0] + d * np.cos(th)
        y = cfg.bs_xy[1] + d * np.sin(th)
        if not (0.0 <= x <= cfg.cell[0] and 0.0 <= y <= cfg.cell[1]):
            continue
        if any(abs(np.angle(np.exp(1j * (th - t)))) < cfg.min_theta_sep for t in thetas):
            continue
        thetas.append(th)
        xys.append((x, y))
    return xys


def generate_scenario(cfg: ScenarioConfig, seed: int) -> Scenario:
    """Sample a drop; pure function of (cfg, seed).

    With collinear=True, EUE i shares the (theta, phi) direction of LUE
    (i mod K) at eue_ratio times its distance, the worst case for leakage.
    Otherwise EUEs are sampled like LUEs.
    """
    rng = np.random.default_rng(np.random.SeedSequence([0x5EC, int(seed)]))
    geom = cfg.geometry()
    lue_xy = _sample_lue_positions(cfg, rng)
    lues = [placement_from_xy(cfg.bs_xy, xy) for xy in lue_xy]

    eues, eue_xy = [], []
    if cfg.collinear:
        for i in range(cfg.e_eues):
            ref = lues[i % cfg.k_lues]
            d = ref.distance * cfg.eue_ratio
            eues.append(UePlacement(theta=ref.theta, phi=ref.phi, distance=d))
            eue_xy.append((cfg.bs_xy[0] + d * np.cos(ref.theta),
                           cfg.bs_xy[1] + d * np.sin(ref.theta)))
    else:
        sub = dataclasses.replace(cfg, k_lues=cfg.e_eues)
        eue_xy = _sample_lue_positions(sub, rng)
        eues = [placement_from_xy(cfg.bs_xy, xy) for xy in eue_xy]

    return Scenario(geom=geom, bs_xy=tuple(cfg.bs_xy), lues=tuple(lues),
                    eues=tuple(eues), lue_xy=np.asarray(lue_xy),
                    eue_xy=np.asarray(eue_xy), cell=tuple(cfg.cell),
                    p_b=cfg.p_b, sigma2=cfg.sigma2,
                    nlos_paths=cfg.nlos_paths, seed=int(seed))


def build_channels(scenario: Scenario, nlos_paths: int | None = None,
                   seed: int | None = None) -> ChannelSet:
    """LoS rows for every user, plus optional NLoS scatterer terms.

    nlos_paths and seed default to the scenario's own values.
    """
    geom = scenario.geom
    if nlos_paths is None:
        nlos_paths = scenario.nlos_paths
    if seed is None:
        seed = scenario.seed
    rng = np.random.default_rng(np.random.SeedSequence([0x51A7, int(seed)]))

    def one(ue):
        row = los_channel(geom, ue)
        if nlos_paths > 0:
            scats = []
            for _ in range(nlos_paths):
                d = rng.uniform(1.0, max(ue.distance, 2.0))
                th = rng.uniform(np.pi, 2.0 * np.pi)
                scats.append(UePlacement(theta=th, phi=np.pi / 2.0, distance=d))
            row = row + nlos_channel(geom, ue, scats, rng)
        return row

    lue_rows = np.array([one(u) for u in scenario.lues])
    eue_rows = np.array([one(u) for u in scenario.eues])
    return ChannelSet(lue_rows=lue_rows, eue_rows=eue_rows)

"""UPA geometry and near-field (spherical wavefront) steering vectors.

The base station carries a uniform planar array in the x-z plane with
half-wavelength spacing. Directions use the physics convention: theta is the
azimuth angle in [0, 2pi), phi the polar angle from the z axis in (0, pi).
Ground-level users sit at phi = pi/2. All angles in radians, distances in
meters.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """UPA with n_x * n_z elements; spacing is exactly wavelength/2."""

    n_x: int
    n_z: int
    wavelength: float

    def __post_init__(self):
        if self.n_x < 1 or self.n_x % 2 == 0:
            raise ValueError(f"n_x must be odd and positive, got {self.n_x}")
        if self.n_z < 1 or self.n_z % 2 == 0:
            raise ValueError(f"n_z must be odd and positive, got {self.n_z}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")

    @property
    def spacing(self) -> float:
        return self.wavelength / 2.0

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_z


@dataclass(frozen=True)
class UePlacement:
    """BS-centric spherical position of one user."""

    theta: float
    phi: float
    distance: float

    def __post_init__(self):
        if not 0.0 <= self.theta < 2.0 * np.pi:
            raise ValueError(f"theta must lie in [0, 2pi), got {self.theta}")
        if not 0.0 < self.phi < np.pi:
            raise ValueError(f"phi must lie in (0, pi), got {self.phi}")
        if not self.distance > 0.0:
            raise ValueError(f"distance must be > 0, got {self.distance}")


def _index_range(n: int) -> np.ndarray:
    # symmetric element indices -N..N with N = (n-1)/2
    half = (n - 1) // 2
    return np.arange(-half, half + 1, dtype=float)


def steering_phase_x(n_bar, theta: float, phi: float, d: float, wavelength: float):
    """Per-element x-axis phase factor with the quadratic distance correction.

    exp(-j 2pi/lambda (n (lambda/2) cos t sin p + n^2/(2d) (lambda^2/4)(1 - cos^2 t sin^2 p)))
    """
    n_bar = np.asarray(n_bar, dtype=float)
    g = np.cos(theta) * np.sin(phi)
    lin = n_bar * (wavelength / 2.0) * g
    quad = (n_bar**2 / (2.0 * d)) * (wavelength**2 / 4.0) * (1.0 - g**2)
    return np.exp(-1j * (2.0 * np.pi / wavelength) * (lin + quad))


def steering_phase_z(n_bar, phi: float, d: float, wavelength: float):
    """Per-element z-axis phase factor with the quadratic distance correction.

    exp(-j 2pi/lambda (n (lambda/2) cos p + n^2/(2d) (lambda^2/4) sin^2 p))
    """
    n_bar = np.asarray(n_bar, dtype=float)
    lin = n_bar * (wavelength / 2.0) * np.cos(phi)
    quad = (n_bar**2 / (2.0 * d)) * (wavelength**2 / 4.0) * np.sin(phi) ** 2
    return np.exp(-1j * (2.0 * np.pi / wavelength) * (lin + quad))


def array_response(geom: ArrayGeometry, ue: UePlacement,
                   far_field: bool = False) -> np.ndarray:
    """Spherical-wave UPA response a(theta, phi, d), length n_x*n_z.

    Kronecker product of the x-axis and z-axis factors. With far_field=True
    the quadratic (1/d) phase terms are dropped, leaving the plane-wave
    response used by angle-only designs.
    """
    d = np.inf if far_field else ue.distance
    ax = steering_phase_x(_index_range(geom.n_x), ue.theta, ue.phi, d, geom.wavelength)
    az = steering_phase_z(_index_range(geom.n_z), ue.phi, d, geom.wavelength)
    return np.kron(ax, az)


def rayleigh_distance(geom: ArrayGeometry) -> float:
    """Classical near/far boundary 2 D^2 / lambda for aperture diagonal D."""
    d_ap = np.hypot(geom.n_x - 1, geom.n_z - 1) * geom.spacing
    return 2.0 * d_ap**2 / geom.wavelength

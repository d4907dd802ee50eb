"""Channel models linking stacks to the outside world.

Three kinds cover the experiments: line-of-sight spherical-wave coupling
(the same free-space kernel the stack itself uses), i.i.d. Rayleigh fading,
and unit-amplitude plane-wave steering fields for angle tasks.
"""

from dataclasses import dataclass, field

import numpy as np

from .diffraction import AXIAL_NORMAL, propagation_matrix
from .errors import InvalidParameter


@dataclass(frozen=True)
class ChannelModel:
    kind: str  # "los", "rayleigh"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("los", "rayleigh"):
            raise InvalidParameter(f"unknown channel kind {self.kind!r}")

    def matrix(self, from_points, to_points, area_m2, lambda_m):
        """Realize the channel between two port sets, shape (to, from)."""
        if self.kind == "los":
            return propagation_matrix(
                from_points, AXIAL_NORMAL, to_points, area_m2, lambda_m
            ).entries
        shape = (np.atleast_2d(to_points).shape[0], np.atleast_2d(from_points).shape[0])
        return rayleigh_matrix(
            shape,
            variance=self.params.get("variance", 1.0),
            seed=self.params.get("seed", 0),
        )


def rayleigh_matrix(shape, variance, seed):
    """i.i.d. circularly-symmetric complex Gaussian entries, E|h|^2 = variance."""
    if not (variance > 0):
        raise InvalidParameter("variance must be positive")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def direction_sines(azimuth_rad, elevation_rad):
    """(u, v) direction sines of an arrival direction.

    u is the sine along +x (azimuth swung in the x-z plane), v along +y.
    """
    u = np.cos(elevation_rad) * np.sin(azimuth_rad)
    v = np.sin(elevation_rad)
    return float(u), float(v)


def angles_from_sines(u, v):
    """Inverse of direction_sines; requires u^2 + v^2 <= 1."""
    if u * u + v * v > 1.0 + 1e-12:
        raise InvalidParameter("direction sines outside the visible region")
    el = np.arcsin(np.clip(v, -1.0, 1.0))
    cos_el = np.cos(el)
    az = 0.0 if cos_el == 0.0 else np.arcsin(np.clip(u / cos_el, -1.0, 1.0))
    return float(az), float(el)


def plane_wave_field(points, azimuth_rad, elevation_rad, lambda_m, amplitude=1.0):
    """Field of a plane wave sampled at the given points; |entry| = |amplitude|.

    The wave travels toward +z; its transverse phase gradient is set by the
    direction sines of the arrival direction.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    u, v = direction_sines(azimuth_rad, elevation_rad)
    k = 2.0 * np.pi / lambda_m
    phase = k * (u * pts[:, 0] + v * pts[:, 1])
    return amplitude * np.exp(1j * phase)

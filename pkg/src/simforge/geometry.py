"""Physical layout of a metasurface stack.

All lengths are SI meters and all frequencies Hz. A stack is an ordered
sequence of parallel planar layers orthogonal to the +z axis: the source
plane sits at z = 0, layer l at z = gap[0] + ... + gap[l-1], and the
observation plane one more gap beyond the last layer. Meta-atoms occupy a
row-major lattice centered on the optical axis with index 0 at the top-left
(max y, min x) corner.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact


@dataclass(frozen=True)
class Wavelength:
    """Operating frequency and the wavelength derived from it."""

    frequency_hz: float
    lambda_m: float = field(init=False)

    def __post_init__(self):
        if not (self.frequency_hz > 0 and np.isfinite(self.frequency_hz)):
            raise InvalidParameter("frequency_hz must be positive and finite")
        object.__setattr__(self, "lambda_m", SPEED_OF_LIGHT / self.frequency_hz)


@dataclass(frozen=True)
class GridLayout:
    """A rows x cols lattice of meta-atoms with uniform pitch.

    meta_atom_area_m2 is the effective aperture of one atom; it defaults to
    pitch^2 (atoms tiling the plane) and may not exceed it.
    """

    rows: int
    cols: int
    pitch_m: float
    meta_atom_area_m2: float = None

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidParameter("grid must have at least one row and column")
        if not (self.pitch_m > 0):
            raise InvalidParameter("pitch_m must be positive")
        if self.meta_atom_area_m2 is None:
            object.__setattr__(self, "meta_atom_area_m2", self.pitch_m**2)
        if not (0 < self.meta_atom_area_m2 <= self.pitch_m**2 * (1 + 1e-12)):
            raise InvalidParameter("meta_atom_area_m2 must lie in (0, pitch^2]")

    @property
    def count(self):
        return self.rows * self.cols

    def atom_positions(self, z_m):
        """Centered row-major lattice at axial coordinate z_m, shape (count, 3)."""
        r = np.arange(self.rows)
        c = np.arange(self.cols)
        x = (c - (self.cols - 1) / 2.0) * self.pitch_m
        y = ((self.rows - 1) / 2.0 - r) * self.pitch_m
        xx, yy = np.meshgrid(x, y)  # yy[r], xx[c]
        pts = np.column_stack([xx.ravel(), yy.ravel(), np.full(self.count, float(z_m))])
        return pts


def linear_array(count, spacing_m, z_m):
    """Centered line of points along x at axial coordinate z_m."""
    if count < 1:
        raise InvalidParameter("port count must be >= 1")
    if not (spacing_m > 0):
        raise InvalidParameter("spacing_m must be positive")
    x = (np.arange(count) - (count - 1) / 2.0) * spacing_m
    return np.column_stack([x, np.zeros(count), np.full(count, float(z_m))])


@dataclass(frozen=True)
class StackGeometry:
    """Full physical description of one stack including its end ports.

    gaps_m has length L+1: gaps_m[0] is source-plane -> layer 1,
    gaps_m[l] is layer l -> layer l+1, gaps_m[L] is layer L -> observation
    plane. source_points / observation_points are absolute coordinates;
    either may be empty for a stack used only as part of a larger cascade.
    source_grid / observation_grid carry the lattice structure when the
    ports were laid out as a grid (needed for spatial-frequency tasks).
    """

    wavelength: Wavelength
    layers: tuple  # of GridLayout
    gaps_m: tuple  # of float, length len(layers)+1
    source_points: np.ndarray  # (S, 3)
    observation_points: np.ndarray  # (P, 3)
    source_grid: GridLayout = None
    observation_grid: GridLayout = None
    port_area_m2: float = None  # kernel area for ports; defaults per adjacent layer

    def __post_init__(self):
        if len(self.layers) < 1:
            raise InvalidParameter("a stack needs at least one layer")
        if len(self.gaps_m) != len(self.layers) + 1:
            raise InvalidParameter("gaps_m must have length len(layers)+1")
        if any(not (g > 0) for g in self.gaps_m):
            raise InvalidParameter("all gaps must be strictly positive")
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "gaps_m", tuple(float(g) for g in self.gaps_m))
        object.__setattr__(
            self, "source_points", np.atleast_2d(np.asarray(self.source_points, dtype=float))
        )
        object.__setattr__(
            self,
            "observation_points",
            np.atleast_2d(np.asarray(self.observation_points, dtype=float)),
        )

    @property
    def num_layers(self):
        return len(self.layers)

    @property
    def lambda_m(self):
        return self.wavelength.lambda_m

    def layer_z(self, l):
        """Axial coordinate of layer l (0-based)."""
        return float(sum(self.gaps_m[: l + 1]))

    @property
    def observation_z(self):
        return float(sum(self.gaps_m))

    def layer_positions(self, l):
        return self.layers[l].atom_positions(self.layer_z(l))

    def atom_counts(self):
        return [g.count for g in self.layers]


def build_stack(
    frequency_hz,
    layer_shapes,
    pitch_in_wavelengths,
    gaps_in_wavelengths,
    source_spec,
    observation_spec,
):
    """Assemble a StackGeometry from wavelength-relative dimensions.

    layer_shapes: list of (rows, cols). Port specs are dicts:
      {"kind": "grid", "rows": R, "cols": C, "pitch_in_wavelengths": p}
      {"kind": "linear", "count": n, "spacing_in_wavelengths": s}
      {"kind": "points", "points_in_wavelengths": [[x, y, z], ...]}
      {"kind": "none"}
    Grid/linear ports sit on the plane their gap defines; explicit points
    are absolute coordinates in wavelengths.
    """
    wl = Wavelength(frequency_hz)
    lam = wl.lambda_m
    layers = tuple(
        GridLayout(int(r), int(c), pitch_in_wavelengths * lam) for r, c in layer_shapes
    )
    gaps = tuple(float(g) * lam for g in gaps_in_wavelengths)

    src_pts, src_grid = _resolve_ports(source_spec, lam, z_m=0.0)
    obs_z = sum(gaps)
    obs_pts, obs_grid = _resolve_ports(observation_spec, lam, z_m=obs_z)
    return StackGeometry(
        wavelength=wl,
        layers=layers,
        gaps_m=gaps,
        source_points=src_pts,
        observation_points=obs_pts,
        source_grid=src_grid,
        observation_grid=obs_grid,
    )


def _resolve_ports(spec, lam, z_m):
    kind = spec.get("kind")
    if kind == "grid":
        grid = GridLayout(
            int(spec["rows"]), int(spec["cols"]), float(spec["pitch_in_wavelengths"]) * lam
        )
        return grid.atom_positions(z_m), grid
    if kind == "linear":
        pts = linear_array(int(spec["count"]), float(spec["spacing_in_wavelengths"]) * lam, z_m)
        return pts, None
    if kind == "points":
        pts = np.asarray(spec["points_in_wavelengths"], dtype=float) * lam
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidParameter("explicit ports must be a list of [x, y, z] triples")
        return pts, None
    if kind == "none":
        return np.zeros((0, 3)), None
    raise InvalidParameter(f"unknown port kind {kind!r}")

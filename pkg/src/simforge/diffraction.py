"""Free-space coupling between stack planes.

The scalar coupling coefficient from a source point to a destination point
across a gap is

    w = (A cos an / d) * (1/(2 pi d) - j/lambda) * exp(j 2 pi d / lambda)

with d the point separation, A the radiating element area, and an the angle
between the propagation direction and the source-plane normal. Stacks here
are parallel planes facing +z, so cos an = (axial offset)/d. The model is
near-field capable but only physically consistent while |w| < 1 for every
coupled pair; validate_geometry flags planes spaced too tightly for that.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateGeometry, InvalidParameter

AXIAL_NORMAL = np.array([0.0, 0.0, 1.0])


def propagation_coefficient(src, dst, src_normal, area_m2, lambda_m):
    """Complex coupling coefficient for one source/destination pair."""
    if not (area_m2 > 0):
        raise InvalidParameter("area_m2 must be positive")
    if not (lambda_m > 0):
        raise InvalidParameter("lambda_m must be positive")
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    diff = dst - src
    d = float(np.sqrt(diff @ diff))
    if d == 0.0:
        raise DegenerateGeometry("source and destination coincide")
    normal = np.asarray(src_normal, dtype=float)
    cos_zeta = float(diff @ normal) / d
    return (
        area_m2
        * cos_zeta
        / d
        * (1.0 / (2.0 * np.pi * d) - 1j / lambda_m)
        * np.exp(2j * np.pi * d / lambda_m)
    )


@dataclass(frozen=True)
class PropagationMatrix:
    """Dense coupling matrix (destinations x sources) with its peak magnitude."""

    entries: np.ndarray
    max_abs: float

    @property
    def shape(self):
        return self.entries.shape


def propagation_matrix(from_points, from_normal, to_points, area_m2, lambda_m):
    """Coupling matrix between two point sets; entry (n, m) couples source m to probe n."""
    if not (area_m2 > 0):
        raise InvalidParameter("area_m2 must be positive")
    if not (lambda_m > 0):
        raise InvalidParameter("lambda_m must be positive")
    src = np.ascontiguousarray(np.atleast_2d(from_points), dtype=float)
    dst = np.ascontiguousarray(np.atleast_2d(to_points), dtype=float)
    if src.shape[0] == 0 or dst.shape[0] == 0:
        raise InvalidParameter("point lists must be nonempty")
    normal = np.ascontiguousarray(from_normal, dtype=float)
    entries, dmin = _kernels.rs_matrix(src, dst, normal, float(area_m2), float(lambda_m))
    if dmin == 0.0:
        raise DegenerateGeometry("coincident source/destination pair")
    if not np.all(np.isfinite(entries)):
        raise DegenerateGeometry("non-finite coupling entries")
    return PropagationMatrix(entries=entries, max_abs=float(np.abs(entries).max()))


def stack_matrices(geom, skip_source=False, skip_observation=False):
    """All inter-plane coupling matrices of a stack, in propagation order.

    Returns [W_in, W_1->2, ..., W_(L-1)->L, W_out]: source ports to layer 1,
    consecutive layers, and layer L to observation ports. Ports use the
    adjacent layer's meta-atom area unless geom.port_area_m2 overrides it.
    Either end hop can be skipped when the stack joins a larger cascade.
    """
    lam = geom.lambda_m
    mats = []
    if not skip_source:
        src_area = geom.port_area_m2 or geom.layers[0].meta_atom_area_m2
        mats.append(
            propagation_matrix(
                geom.source_points, AXIAL_NORMAL, geom.layer_positions(0), src_area, lam
            )
        )
    for l in range(1, geom.num_layers):
        mats.append(
            propagation_matrix(
                geom.layer_positions(l - 1),
                AXIAL_NORMAL,
                geom.layer_positions(l),
                geom.layers[l - 1].meta_atom_area_m2,
                lam,
            )
        )
    if not skip_observation:
        mats.append(
            propagation_matrix(
                geom.layer_positions(geom.num_layers - 1),
                AXIAL_NORMAL,
                geom.observation_points,
                geom.layers[-1].meta_atom_area_m2,
                lam,
            )
        )
    return mats


def validate_geometry(geom):
    """Physical-consistency warnings: one per adjacent-plane pair with |w| >= 1.

    Empty list means every coupling magnitude stays below one (the model's
    rule-of-thumb validity bound). Advisory only; never raises.
    """
    names = (
        ["source->layer1"]
        + [f"layer{l}->layer{l + 1}" for l in range(1, geom.num_layers)]
        + [f"layer{geom.num_layers}->observation"]
    )
    warnings = []
    skip_src = geom.source_points.shape[0] == 0
    skip_obs = geom.observation_points.shape[0] == 0
    for name, mat in zip(names, _iter_interface_matrices(geom, skip_src, skip_obs)):
        if mat is not None and mat.max_abs >= 1.0:
            warnings.append(
                f"{name}: peak coupling magnitude {mat.max_abs:.6g} >= 1; "
                "gap too small for a physically consistent model"
            )
    return warnings


def _iter_interface_matrices(geom, skip_src, skip_obs):
    lam = geom.lambda_m
    if skip_src:
        yield None
    else:
        area = geom.port_area_m2 or geom.layers[0].meta_atom_area_m2
        yield propagation_matrix(
            geom.source_points, AXIAL_NORMAL, geom.layer_positions(0), area, lam
        )
    for l in range(1, geom.num_layers):
        yield propagation_matrix(
            geom.layer_positions(l - 1),
            AXIAL_NORMAL,
            geom.layer_positions(l),
            geom.layers[l - 1].meta_atom_area_m2,
            lam,
        )
    if skip_obs:
        yield None
    else:
        yield propagation_matrix(
            geom.layer_positions(geom.num_layers - 1),
            AXIAL_NORMAL,
            geom.observation_points,
            geom.layers[-1].meta_atom_area_m2,
            lam,
        )

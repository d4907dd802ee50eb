import numpy as np
import pytest

import simforge as sf
from simforge.errors import InvalidParameter
from simforge.geometry import SPEED_OF_LIGHT, linear_array


def test_wavelength_derivation():
    for f in (2.4e9, 28e9, 0.4e12):
        wl = sf.Wavelength(f)
        assert abs(wl.lambda_m * wl.frequency_hz - SPEED_OF_LIGHT) / SPEED_OF_LIGHT < 1e-12
        assert wl.lambda_m > 0
    with pytest.raises(InvalidParameter):
        sf.Wavelength(0.0)
    with pytest.raises(InvalidParameter):
        sf.Wavelength(-1e9)


def test_grid_layout_area_bound():
    g = sf.GridLayout(3, 4, 0.005)
    assert g.meta_atom_area_m2 == 0.005**2  # defaults to a tiling atom
    assert g.count == 12
    sf.GridLayout(2, 2, 0.01, meta_atom_area_m2=5e-5)
    with pytest.raises(InvalidParameter):
        sf.GridLayout(2, 2, 0.01, meta_atom_area_m2=2e-4)  # atoms would overlap
    with pytest.raises(InvalidParameter):
        sf.GridLayout(0, 2, 0.01)
    with pytest.raises(InvalidParameter):
        sf.GridLayout(2, 2, 0.0)


def test_lattice_centered_row_major_top_left():
    g = sf.GridLayout(2, 3, 1.0)
    pts = g.atom_positions(5.0)
    assert pts.shape == (6, 3)
    assert np.allclose(pts.mean(axis=0), [0.0, 0.0, 5.0])
    # index 0 at top-left: minimum x, maximum y
    assert pts[0, 0] == pts[:, 0].min()
    assert pts[0, 1] == pts[:, 1].max()
    # row-major: consecutive indices advance along x first
    assert pts[1, 0] > pts[0, 0] and pts[1, 1] == pts[0, 1]
    assert pts[3, 1] < pts[0, 1]


def test_stack_geometry_requires_positive_gaps():
    wl = sf.Wavelength(28e9)
    layer = sf.GridLayout(2, 2, 0.005)
    with pytest.raises(InvalidParameter):
        sf.StackGeometry(
            wavelength=wl,
            layers=(layer,),
            gaps_m=(0.01, 0.0),
            source_points=[[0, 0, 0]],
            observation_points=[[0, 0, 0.02]],
        )
    with pytest.raises(InvalidParameter):
        sf.StackGeometry(
            wavelength=wl,
            layers=(),
            gaps_m=(0.01,),
            source_points=[[0, 0, 0]],
            observation_points=[[0, 0, 0.02]],
        )
    with pytest.raises(InvalidParameter):
        sf.StackGeometry(
            wavelength=wl,
            layers=(layer,),
            gaps_m=(0.01,),
            source_points=[[0, 0, 0]],
            observation_points=[[0, 0, 0.01]],
        )


def test_layer_planes_ordered_along_axis():
    geom = sf.build_stack(
        28e9,
        [(2, 2), (3, 3), (2, 2)],
        0.5,
        [1.0, 2.0, 0.5, 1.0],
        {"kind": "linear", "count": 2, "spacing_in_wavelengths": 1.0},
        {"kind": "linear", "count": 2, "spacing_in_wavelengths": 1.0},
    )
    zs = [geom.layer_z(i) for i in range(3)]
    assert zs == sorted(zs)
    assert geom.observation_z > zs[-1]
    assert geom.observation_points[0, 2] == pytest.approx(geom.observation_z)


def test_linear_array_validation():
    with pytest.raises(InvalidParameter):
        linear_array(0, 1.0, 0.0)
    with pytest.raises(InvalidParameter):
        linear_array(3, 0.0, 0.0)
    pts = linear_array(3, 2.0, 1.0)
    assert np.allclose(pts[:, 0], [-2.0, 0.0, 2.0])


def test_port_spec_validation():
    with pytest.raises(InvalidParameter):
        sf.build_stack(
            28e9,
            [(2, 2)],
            0.5,
            [1.0, 1.0],
            {"kind": "mystery"},
            {"kind": "none"},
        )
    with pytest.raises(InvalidParameter):
        sf.build_stack(
            28e9,
            [(2, 2)],
            0.5,
            [1.0, 1.0],
            {"kind": "points", "points_in_wavelengths": [[1.0, 2.0]]},
            {"kind": "none"},
        )

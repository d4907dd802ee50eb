import numpy as np
import pytest

import simforge as sf
from simforge._kernels import backend_name, numpy_backend
from simforge.diffraction import AXIAL_NORMAL, propagation_matrix
from simforge.errors import DegenerateGeometry, InvalidParameter

from conftest import grid_stack

CLOSED_FORM = 1.0 / (8.0 * np.pi) - 0.25j


@pytest.mark.parametrize("lam", [0.010706873142857143, 0.5, 2.0])
def test_on_axis_closed_form(lam):
    # on-axis pair one wavelength apart with a half-wavelength-square atom
    w = sf.propagation_coefficient((0, 0, 0), (0, 0, lam), (0, 0, 1), (lam / 2) ** 2, lam)
    assert abs(w - CLOSED_FORM) / abs(CLOSED_FORM) < 1e-12
    assert abs(abs(w) - np.sqrt(1 / (64 * np.pi**2) + 1 / 16)) < 1e-12
    assert abs(abs(w) - 0.25315) < 1e-5


def test_closed_form_against_high_precision():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    lam = mp.mpf("0.375")
    d = lam
    area = (lam / 2) ** 2
    w_hp = (area / d) * (1 / (2 * mp.pi * d) - 1j / lam) * mp.e ** (2j * mp.pi * d / lam)
    ref = 1 / (8 * mp.pi) - mp.mpf("0.25") * 1j
    assert abs(w_hp - ref) < mp.mpf("1e-45")
    w = sf.propagation_coefficient((0, 0, 0), (0, 0, 0.375), (0, 0, 1), 0.375**2 / 4, 0.375)
    assert abs(w - complex(ref)) < 1e-15


def test_coincident_points_rejected():
    with pytest.raises(DegenerateGeometry):
        sf.propagation_coefficient((1, 2, 3), (1, 2, 3), (0, 0, 1), 1e-4, 0.01)
    pts = np.array([[0.0, 0.0, 0.0], [0.1, 0.0, 0.0]])
    with pytest.raises(DegenerateGeometry):
        propagation_matrix(pts, AXIAL_NORMAL, pts, 1e-4, 0.01)


@pytest.mark.parametrize("area,lam", [(-1.0, 0.01), (0.0, 0.01), (1e-4, 0.0), (1e-4, -2.0)])
def test_invalid_scalars_rejected(area, lam):
    with pytest.raises(InvalidParameter):
        sf.propagation_coefficient((0, 0, 0), (0, 0, 1), (0, 0, 1), area, lam)


def test_pairwise_symmetry_parallel_planes():
    lam = 0.0107
    a = np.array([0.3 * lam, -0.2 * lam, 0.0])
    b = np.array([-0.1 * lam, 0.4 * lam, lam])
    w_ab = sf.propagation_coefficient(a, b, (0, 0, 1), (lam / 2) ** 2, lam)
    w_ba = sf.propagation_coefficient(b, a, (0, 0, -1), (lam / 2) ** 2, lam)
    assert abs(w_ab - w_ba) / abs(w_ab) < 1e-12


def test_reciprocity_matrix_transpose():
    geom = grid_stack(4, 4, layers=2)
    a = geom.layer_positions(0)
    b = geom.layer_positions(1)
    area = geom.layers[0].meta_atom_area_m2
    fwd = propagation_matrix(a, AXIAL_NORMAL, b, area, geom.lambda_m).entries
    # reverse direction: same parallel planes, normal flipped with the roles
    bwd = propagation_matrix(b, np.array([0.0, 0.0, -1.0]), a, area, geom.lambda_m).entries
    assert np.max(np.abs(fwd - bwd.T)) / np.max(np.abs(fwd)) < 1e-12


def test_phase_structure():
    rng = np.random.default_rng(3)
    lam = 0.0107
    for _ in range(50):
        src = rng.uniform(-5 * lam, 5 * lam, 3)
        dst = rng.uniform(-5 * lam, 5 * lam, 3)
        dst[2] = src[2] + rng.uniform(0.5 * lam, 4 * lam)
        w = sf.propagation_coefficient(src, dst, (0, 0, 1), (lam / 2) ** 2, lam)
        d = np.linalg.norm(dst - src)
        expect = (2 * np.pi * d / lam + np.angle(1 / (2 * np.pi * d) - 1j / lam)) % (2 * np.pi)
        got = np.angle(w) % (2 * np.pi)
        delta = min(abs(got - expect), 2 * np.pi - abs(got - expect))
        assert delta < 1e-9


def test_far_field_decay_in_gap():
    lam = 0.0107
    transverse = 0.75 * lam
    mags = []
    for gap in np.linspace(1.2 * lam, 8 * lam, 30):
        w = sf.propagation_coefficient(
            (0, 0, 0), (transverse, 0, gap), (0, 0, 1), (lam / 2) ** 2, lam
        )
        mags.append(abs(w))
    assert np.all(np.diff(mags) < 0)


def test_single_pair_matrix_matches_coefficient():
    lam = 0.5
    m = propagation_matrix([[0, 0, 0]], AXIAL_NORMAL, [[0, 0, lam]], (lam / 2) ** 2, lam)
    assert m.shape == (1, 1)
    assert abs(m.entries[0, 0] - CLOSED_FORM) / abs(CLOSED_FORM) < 1e-12
    assert m.max_abs == abs(m.entries[0, 0])


def test_validity_bound_reference_geometry():
    # 10x10 atoms, half-wavelength pitch, one-wavelength gaps: consistent
    geom = grid_stack(10, 10, layers=2)
    for mat in sf.diffraction.stack_matrices(geom):
        assert mat.max_abs < 1.0
    assert sf.validate_geometry(geom) == []


def test_validity_warning_tight_gap():
    geom = sf.build_stack(
        28e9,
        [(4, 4), (4, 4)],
        0.5,
        [1.0, 0.001, 1.0],
        {"kind": "linear", "count": 2, "spacing_in_wavelengths": 1.0},
        {"kind": "linear", "count": 2, "spacing_in_wavelengths": 1.0},
    )
    warnings = sf.validate_geometry(geom)
    assert len(warnings) == 1
    assert "layer1->layer2" in warnings[0]


def test_validity_single_layer_checks_port_interfaces_only():
    geom = sf.build_stack(
        28e9,
        [(4, 4)],
        0.5,
        [0.001, 0.002],
        {"kind": "grid", "rows": 4, "cols": 4, "pitch_in_wavelengths": 0.5},
        {"kind": "grid", "rows": 4, "cols": 4, "pitch_in_wavelengths": 0.5},
    )
    warnings = sf.validate_geometry(geom)
    assert len(warnings) == 2
    assert any("source" in w for w in warnings)
    assert any("observation" in w for w in warnings)


def test_matrix_determinism_bit_identical():
    geom = grid_stack(5, 5, layers=1)
    a = propagation_matrix(
        geom.source_points, AXIAL_NORMAL, geom.layer_positions(0), 1e-5, geom.lambda_m
    ).entries
    b = propagation_matrix(
        geom.source_points, AXIAL_NORMAL, geom.layer_positions(0), 1e-5, geom.lambda_m
    ).entries
    assert np.array_equal(a, b)


@pytest.mark.skipif(backend_name() == "numpy", reason="compiled kernel not built")
def test_backends_agree():
    rng = np.random.default_rng(0)
    src = np.ascontiguousarray(rng.uniform(-1, 1, (30, 3)))
    dst = np.ascontiguousarray(rng.uniform(-1, 1, (25, 3)))
    dst[:, 2] += 4.0
    normal = np.array([0.0, 0.0, 1.0])
    from simforge._kernels import active

    a, _ = numpy_backend.rs_matrix(src, dst, normal, 0.01, 0.3)
    b, _ = active.rs_matrix(src, dst, normal, 0.01, 0.3)
    assert np.max(np.abs(a - b)) / np.max(np.abs(a)) < 1e-13

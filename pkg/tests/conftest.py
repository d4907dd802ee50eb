import numpy as np
import pytest

import simforge as sf


def small_stack(seed=0, layer_shapes=((3, 3), (3, 3)), sources=3, probes=3, freq=28e9):
    """Random-ish small stack with linear end ports."""
    rng = np.random.default_rng(seed)
    gaps = [float(g) for g in rng.uniform(0.8, 1.5, len(layer_shapes) + 1)]
    return sf.build_stack(
        freq,
        list(layer_shapes),
        0.5,
        gaps,
        {"kind": "linear", "count": sources, "spacing_in_wavelengths": 0.9},
        {"kind": "linear", "count": probes, "spacing_in_wavelengths": 1.1},
    )


def grid_stack(rows, cols, layers=2, freq=28e9, port_rows=None, port_cols=None):
    """Stack with grid end ports (defaults: ports match the layer lattice)."""
    pr = port_rows or rows
    pc = port_cols or cols
    return sf.build_stack(
        freq,
        [(rows, cols)] * layers,
        0.5,
        [1.0] * (layers + 1),
        {"kind": "grid", "rows": pr, "cols": pc, "pitch_in_wavelengths": 0.5},
        {"kind": "grid", "rows": pr, "cols": pc, "pitch_in_wavelengths": 0.5},
    )


def superposition_forward(geom, prof):
    """Independent oracle: per-atom field accumulation, plane by plane.

    Walks each source's field through the stack with scalar coupling
    coefficients and explicit python loops; no matrix products.
    """
    lam = geom.lambda_m
    n_src = geom.source_points.shape[0]
    n_obs = geom.observation_points.shape[0]
    trans = prof.transmissions()
    out = np.zeros((n_obs, n_src), dtype=complex)
    for s in range(n_src):
        pts = [geom.source_points[s]]
        field = [1.0 + 0.0j]
        for l in range(geom.num_layers):
            area = (
                geom.layers[0].meta_atom_area_m2 if l == 0 else geom.layers[l - 1].meta_atom_area_m2
            )
            next_pts = geom.layer_positions(l)
            next_field = []
            for n in range(next_pts.shape[0]):
                tot = 0.0 + 0.0j
                for m in range(len(pts)):
                    tot += field[m] * sf.propagation_coefficient(
                        pts[m], next_pts[n], (0.0, 0.0, 1.0), area, lam
                    )
                next_field.append(tot * trans[l][n])
            pts = list(next_pts)
            field = next_field
        area = geom.layers[-1].meta_atom_area_m2
        for p in range(n_obs):
            tot = 0.0 + 0.0j
            for m in range(len(pts)):
                tot += field[m] * sf.propagation_coefficient(
                    pts[m], geom.observation_points[p], (0.0, 0.0, 1.0), area, lam
                )
            out[p, s] = tot
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

"""Spatial-frequency tasks: DFT operator fitting and angle-of-arrival estimation.

Bin conventions: the transform acts on the row-major source grid; output
port p*C+q carries spatial-frequency bin (p, q). With centered (fft-shifted)
bin indices p', q' and pitch D, bin (p, q) is the arrival direction with
direction sines

    u = q' * lambda / (C * D),   v = -p' * lambda / (R * D)

(the minus sign follows from rows counting downward from the top-left
corner, i.e. against +y). Only bins with u^2 + v^2 <= 1 correspond to
propagating waves; those form the detection regions, one bin each.
"""

from dataclasses import dataclass

import numpy as np

from ..channels import angles_from_sines, direction_sines, plane_wave_field
from ..errors import InvalidParameter, ShapeError
from ..losses import MatrixFit
from ..optimize import gradient_descent
from ..stack import forward_operator, random_profile


@dataclass(frozen=True)
class DftTarget:
    """Unitary 2D DFT matrix over an R x C grid, bins row-major."""

    matrix: np.ndarray
    rows: int
    cols: int
    scale: float = 1.0


def dft_matrix(rows, cols):
    """Unitary 2D DFT, shape (rows*cols, rows*cols); F^H F = I."""
    fr = np.exp(-2j * np.pi * np.outer(np.arange(rows), np.arange(rows)) / rows) / np.sqrt(rows)
    fc = np.exp(-2j * np.pi * np.outer(np.arange(cols), np.arange(cols)) / cols) / np.sqrt(cols)
    return np.kron(fr, fc)


def dft_target(rows, cols):
    return DftTarget(matrix=dft_matrix(rows, cols), rows=rows, cols=cols)


def centered_index(i, n):
    """Map an unshifted bin index to its centered (fftshift-style) value."""
    return i if i < (n + 1) // 2 else i - n


def bin_to_sines(p, q, rows, cols, pitch_m, lambda_m):
    u = centered_index(q, cols) * lambda_m / (cols * pitch_m)
    v = -centered_index(p, rows) * lambda_m / (rows * pitch_m)
    return u, v


def sines_to_bin(u, v, rows, cols, pitch_m, lambda_m):
    """Nearest bin (p, q) for given direction sines."""
    q = int(round(u * cols * pitch_m / lambda_m)) % cols
    p = int(round(-v * rows * pitch_m / lambda_m)) % rows
    return p, q


def visible_bins(rows, cols, pitch_m, lambda_m):
    """Flat indices of bins inside the propagating (visible) region."""
    out = []
    for p in range(rows):
        for q in range(cols):
            u, v = bin_to_sines(p, q, rows, cols, pitch_m, lambda_m)
            if u * u + v * v <= 1.0 + 1e-12:
                out.append(p * cols + q)
    return np.asarray(out, dtype=int)


def fit_dft(geom, cfg, init=None):
    """Train the stack to realize the 2D DFT up to one complex scale.

    The scale is re-solved in closed form at every loss evaluation, so the
    objective is ||beta*G - F||_F^2 at the per-iterate optimum beta. The
    report's normalized_fit_error metric is that value divided by ||F||_F^2.
    """
    grid = geom.source_grid
    if grid is None:
        raise ShapeError("fit_dft needs grid-structured source ports")
    n = grid.count
    if geom.source_points.shape[0] != n or geom.observation_points.shape[0] != n:
        raise ShapeError("source and observation port counts must both equal the grid size")
    target = dft_matrix(grid.rows, grid.cols)
    loss = MatrixFit(target, fit_scale=True)
    if init is None:
        init = random_profile(geom, cfg.seed)
    report = gradient_descent(geom, init, loss, cfg)
    g = forward_operator(geom, report.final_profile).matrix
    beta = loss.scale_for(g)
    err = loss.value(g)
    report.metrics.update(
        {
            "normalized_fit_error": err / n,
            "beta_re": float(beta.real),
            "beta_im": float(beta.imag),
        }
    )
    return report


@dataclass
class DoaEstimate:
    """Top-K arrival estimate from an aggregated spatial spectrum."""

    angles: list  # of (azimuth_rad, elevation_rad)
    bin_indices: list  # flat grid bins, row-major
    spectrum: np.ndarray  # aggregated intensity over detection regions
    num_sources: int
    region_bins: np.ndarray  # flat bin index of each detection region


def snapshot_offsets(snapshots, rows, cols):
    """Deterministic bin-offset cycle applied across snapshots.

    Distinct offsets enumerated in diagonal stripes, so small snapshot
    counts already mix both bin axes.
    """
    stripes = sorted(
        ((p, q) for p in range(rows) for q in range(cols)),
        key=lambda pq: (pq[0] + pq[1], pq[0]),
    )
    return [stripes[t % len(stripes)] for t in range(snapshots)]


def doa_estimate(
    geom,
    trained_profile,
    sources,
    num_sources,
    snapshots,
    seed,
    operator=None,
    snr_db=None,
):
    """Estimate arrival angles by reading the stack's output spectrum.

    The superposed plane-wave field is synthesized on the source grid; each
    snapshot multiplies it by the cycling linear phase ramp of the input
    encoding plane, which shifts every spectral bin by that snapshot's
    offset. Per-port intensities are shifted back and averaged, and the
    top-K detection regions (ties to the lower bin index) give the
    estimates. `operator` substitutes an explicit matrix (e.g. the exact
    DFT) for the trained stack operator.
    """
    grid = geom.source_grid
    if grid is None:
        raise ShapeError("doa_estimate needs grid-structured source ports")
    rows, cols, pitch = grid.rows, grid.cols, grid.pitch_m
    lam = geom.lambda_m
    regions = visible_bins(rows, cols, pitch, lam)
    if num_sources > regions.size:
        raise InvalidParameter(
            f"num_sources {num_sources} exceeds {regions.size} detection regions"
        )
    if snapshots < 1:
        raise InvalidParameter("snapshots must be >= 1")
    # the grid resolves direction sines up to the Nyquist box lambda/(2*pitch)
    sine_limit = min(1.0, lam / (2.0 * pitch))
    for az, el, _ in sources:
        u, v = direction_sines(az, el)
        if max(abs(u), abs(v)) > sine_limit + 1e-12:
            raise InvalidParameter("source direction outside the field of view")

    if operator is None:
        if trained_profile is None:
            raise InvalidParameter("need a trained profile or an explicit operator")
        operator = forward_operator(geom, trained_profile).matrix
    operator = np.asarray(operator, dtype=complex)
    if operator.shape != (grid.count, grid.count):
        raise ShapeError("operator must be square on the source grid (one port per bin)")

    field = np.zeros(grid.count, dtype=complex)
    for az, el, amp in sources:
        field = field + amp * plane_wave_field(geom.source_points, az, el, lam)

    rng = np.random.default_rng(seed)
    r_idx = np.repeat(np.arange(rows), cols)
    c_idx = np.tile(np.arange(cols), rows)
    accum = np.zeros(grid.count)
    for dp, dq in snapshot_offsets(snapshots, rows, cols):
        ramp = np.exp(-2j * np.pi * (dp * r_idx / rows + dq * c_idx / cols))
        out = operator @ (ramp * field)
        if snr_db is not None:
            sig_power = float(np.mean(np.abs(out) ** 2))
            noise_var = sig_power * 10.0 ** (-snr_db / 10.0)
            noise = rng.standard_normal(out.shape) + 1j * rng.standard_normal(out.shape)
            out = out + np.sqrt(noise_var / 2.0) * noise
        inten = np.abs(out) ** 2
        # output port (p, q) carried bin (p+dp, q+dq); shift intensities back
        shifted = inten.reshape(rows, cols)
        shifted = np.roll(np.roll(shifted, dp, axis=0), dq, axis=1)
        accum += shifted.ravel()
    accum /= snapshots

    spectrum = accum[regions]
    order = np.argsort(-spectrum, kind="stable")
    top = order[:num_sources]
    bins = [int(regions[i]) for i in top]
    angles = []
    for b in bins:
        u, v = bin_to_sines(b // cols, b % cols, rows, cols, pitch, lam)
        angles.append(angles_from_sines(u, v))
    return DoaEstimate(
        angles=angles,
        bin_indices=bins,
        spectrum=spectrum,
        num_sources=num_sources,
        region_bins=regions,
    )


def doa_squared_error(sources, estimate):
    """Mean squared direction-sine error under the best source/estimate pairing."""
    from itertools import permutations

    true_uv = [direction_sines(az, el) for az, el, *_ in sources]
    est_uv = [direction_sines(az, el) for az, el in estimate.angles]
    k = len(true_uv)
    best = np.inf
    for perm in permutations(range(len(est_uv)), k):
        err = 0.0
        for i, j in enumerate(perm):
            du = true_uv[i][0] - est_uv[j][0]
            dv = true_uv[i][1] - est_uv[j][1]
            err += du * du + dv * dv
        best = min(best, err / k)
    return best

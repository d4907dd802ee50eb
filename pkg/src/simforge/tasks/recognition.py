"""Detection-region classification: route input energy to the labeled region."""

import numpy as np

from ..channels import plane_wave_field
from ..errors import InvalidParameter, ShapeError
from ..losses import EnergyRoutingCE
from ..optimize import gradient_descent
from ..stack import forward_operator, random_profile

QUADRANT_SIGNS = [(1, 1), (-1, 1), (-1, -1), (1, -1)]  # (u, v) per class


def classify_regions(energies):
    """Predicted class = region with the highest summed intensity."""
    return np.argmax(np.asarray(energies), axis=-1)


def quadrant_regions(grid):
    """Four detection regions: the quadrant blocks of an observation grid.

    Class order matches QUADRANT_SIGNS: (+u,+v) is the top-right block,
    then counterclockwise.
    """
    half_r = grid.rows // 2
    half_c = grid.cols // 2
    idx = np.arange(grid.count).reshape(grid.rows, grid.cols)
    top, bottom = idx[:half_r], idx[half_r:]
    return [
        top[:, half_c:].ravel(),
        top[:, :half_c].ravel(),
        bottom[:, :half_c].ravel(),
        bottom[:, half_c:].ravel(),
    ]


def quadrant_beam_dataset(geom, samples_per_class, seed, sine_lo=0.15, sine_hi=0.6):
    """Unit-power plane waves labeled by the (u, v) quadrant they arrive from."""
    if samples_per_class < 1:
        raise InvalidParameter("samples_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    pts = geom.source_points
    norm = np.sqrt(pts.shape[0])
    fields = []
    labels = []
    for cls, (su, sv) in enumerate(QUADRANT_SIGNS):
        for _ in range(samples_per_class):
            u = su * rng.uniform(sine_lo, sine_hi)
            v = sv * rng.uniform(sine_lo, sine_hi)
            el = np.arcsin(v)
            az = np.arcsin(u / np.cos(el))
            fields.append(plane_wave_field(pts, az, el, geom.lambda_m) / norm)
            labels.append(cls)
    return np.asarray(fields), np.asarray(labels, dtype=int)


def energy_routing_train(geom, regions, dataset, cfg, init=None, heldout=None):
    """Train the stack to concentrate each class's output energy in its region.

    dataset is (inputs, labels); heldout, when given, adds a held-out
    accuracy metric. Minimizes softmax cross-entropy over per-region
    intensities.
    """
    inputs, labels = dataset
    loss = EnergyRoutingCE(inputs, labels, regions)
    if geom.observation_points.shape[0] < 1 + max(int(r.max()) for r in loss.regions):
        raise ShapeError("a detection region indexes beyond the observation ports")
    if init is None:
        init = random_profile(geom, cfg.seed)
    report = gradient_descent(geom, init, loss, cfg)
    g = forward_operator(geom, report.final_profile).matrix
    report.metrics["train_accuracy"] = loss.accuracy(g)
    if heldout is not None:
        h_in, h_lab = heldout
        h_loss = EnergyRoutingCE(h_in, h_lab, regions)
        report.metrics["heldout_accuracy"] = h_loss.accuracy(g)
    return report

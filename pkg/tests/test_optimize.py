import numpy as np
import pytest

import simforge as sf
from simforge.errors import InvalidParameter, NonFiniteLoss
from simforge.stack import TWO_PI, stack_chain

from conftest import grid_stack, small_stack

ALL_LOSSES = ["MatrixFit", "InterferenceLeakage", "NegSumRate", "EnergyRoutingCE"]


def make_loss(kind, geom, seed=0):
    rng = np.random.default_rng(seed)
    s = geom.source_points.shape[0]
    p = geom.observation_points.shape[0]
    if kind == "MatrixFit":
        tgt = 0.1 * (rng.standard_normal((p, s)) + 1j * rng.standard_normal((p, s)))
        return sf.MatrixFit(tgt, fit_scale=bool(seed % 2))
    if kind == "InterferenceLeakage":
        return sf.InterferenceLeakage()
    if kind == "NegSumRate":
        return sf.NegSumRate(powers=rng.uniform(0.2, 2.0, s), noise_power=0.01)
    n_reg = min(3, p)
    ports = rng.permutation(p)
    regions = np.array_split(ports, n_reg)
    batch = 6
    x = (rng.standard_normal((batch, s)) + 1j * rng.standard_normal((batch, s))) / np.sqrt(s)
    labels = rng.integers(0, n_reg, batch)
    return sf.EnergyRoutingCE(x, labels, regions)


@pytest.mark.parametrize("kind", ALL_LOSSES)
def test_gradient_matches_finite_differences(kind):
    for trial in range(3):
        geom = small_stack(seed=trial, layer_shapes=((3, 3), (3, 3)))
        prof = sf.random_profile(geom, 50 + trial)
        loss = make_loss(kind, geom, seed=trial)
        val, grads = sf.loss_and_gradient(geom, prof, loss)
        _, grads_fd = sf.loss_and_gradient(
            geom, prof, loss, gradient_mode="finite_difference", fd_epsilon=1e-6
        )
        ga = np.concatenate(grads)
        gf = np.concatenate(grads_fd)
        assert np.max(np.abs(ga - gf)) / max(np.max(np.abs(gf)), 1e-300) < 1e-5


def test_matrix_fit_at_target_is_stationary():
    geom = small_stack(seed=9)
    prof = sf.random_profile(geom, 1)
    g = sf.forward_operator(geom, prof).matrix
    for fit_scale in (False, True):
        loss = sf.MatrixFit(g, fit_scale=fit_scale)
        val, grads = sf.loss_and_gradient(geom, prof, loss)
        assert val < 1e-22
        assert np.max(np.abs(np.concatenate(grads))) < 1e-12


def test_leakage_single_stream_is_zero():
    geom = small_stack(seed=10, sources=1, probes=1)
    prof = sf.random_profile(geom, 4)
    val, grads = sf.loss_and_gradient(geom, prof, sf.InterferenceLeakage())
    assert val == 0.0
    assert np.all(np.concatenate(grads) == 0.0)


def test_non_finite_loss_raises():
    geom = small_stack(seed=11, sources=2, probes=2)
    prof = sf.random_profile(geom, 4)
    # zero noise and zero allocated interference power: infinite SINR
    loss = sf.NegSumRate(powers=[1.0, 0.0], noise_power=0.0)
    with pytest.raises(NonFiniteLoss):
        sf.loss_and_gradient(geom, prof, loss)


def test_gradient_descent_zero_iters_is_noop():
    geom = small_stack(seed=12)
    prof = sf.random_profile(geom, 5)
    loss = make_loss("MatrixFit", geom, seed=2)
    cfg = sf.TrainConfig(max_iters=0, step_size=0.1)
    rep = sf.gradient_descent(geom, prof, loss, cfg)
    assert rep.iterations_run == 0
    assert rep.loss_history.shape == (1,)
    assert rep.final_loss == rep.loss_history[0]
    for a, b in zip(rep.final_profile.phases, prof.phases):
        assert np.array_equal(a, b)


def test_gradient_descent_best_so_far_exact():
    geom = small_stack(seed=13)
    prof = sf.random_profile(geom, 6)
    loss = make_loss("MatrixFit", geom, seed=3)
    cfg = sf.TrainConfig(max_iters=60, step_size=5.0, step_decay=0.98)
    rep = sf.gradient_descent(geom, prof, loss, cfg)
    chain = stack_chain(geom, rep.final_profile)
    returned_loss = loss.value(chain.operator(rep.final_profile.phases))
    assert returned_loss == rep.loss_history.min()
    assert np.all(rep.loss_history[0] >= rep.final_loss)
    for p in rep.final_profile.phases:
        assert np.all((p >= 0) & (p < TWO_PI))


def test_gradient_descent_deterministic():
    geom = small_stack(seed=14)
    loss = make_loss("InterferenceLeakage", geom)
    cfg = sf.TrainConfig(max_iters=40, step_size=20.0, seed=9)
    reps = []
    for _ in range(2):
        prof = sf.random_profile(geom, cfg.seed)
        reps.append(sf.gradient_descent(geom, prof, loss, cfg))
    assert np.array_equal(reps[0].loss_history, reps[1].loss_history)
    for a, b in zip(reps[0].final_profile.phases, reps[1].final_profile.phases):
        assert np.array_equal(a, b)


def test_trainable_mask_is_respected():
    geom = grid_stack(3, 3, layers=2)
    prof = sf.random_profile(geom, 8)
    frozen = prof.phases[0].copy()
    prof.trainable[0][:] = False
    loss = make_loss("MatrixFit", geom, seed=4)
    cfg = sf.TrainConfig(max_iters=30, step_size=5.0)
    rep = sf.gradient_descent(geom, prof, loss, cfg)
    assert np.array_equal(rep.final_profile.phases[0], frozen)
    assert not np.array_equal(rep.final_profile.phases[1], prof.phases[1])

    quant = sf.quantize_phases(prof, 1)
    frozen_q = quant.phases[0].copy()
    rep2 = sf.successive_refinement(geom, quant, loss, sweeps=2)
    assert np.array_equal(rep2.final_profile.phases[0], frozen_q)


class _BlowUpLoss:
    """Finite at the first evaluations, then non-finite: forces the diverged path."""

    def __init__(self, fuse=3):
        self.calls = 0
        self.fuse = fuse

    def value(self, g):
        self.calls += 1
        if self.calls > self.fuse:
            return float("inf")
        return float(np.vdot(g, g).real)

    def value_and_adjoint(self, g):
        return self.value(g), g.copy()


def test_gradient_descent_flags_divergence():
    geom = small_stack(seed=15)
    prof = sf.random_profile(geom, 3)
    cfg = sf.TrainConfig(max_iters=50, step_size=0.1)
    rep = sf.gradient_descent(geom, prof, _BlowUpLoss(), cfg)
    assert rep.metrics.get("diverged") == 1.0
    assert rep.iterations_run < 50
    assert np.all(np.isfinite(rep.loss_history))


def test_refinement_single_atom_matches_exhaustive():
    geom = sf.build_stack(
        28e9,
        [(1, 1)],
        0.5,
        [1.0, 1.0],
        {"kind": "linear", "count": 1, "spacing_in_wavelengths": 1.0},
        {"kind": "linear", "count": 1, "spacing_in_wavelengths": 1.0},
    )
    loss = sf.MatrixFit(np.array([[0.05 - 0.1j]]))
    for init_phase in (0.0, np.pi):
        init = sf.PhaseProfile(phases=[np.array([init_phase])], codebook_bits=1)
        rep = sf.successive_refinement(geom, init, loss, sweeps=2)
        cand_losses = []
        for cand in (0.0, np.pi):
            p = sf.PhaseProfile(phases=[np.array([cand])])
            cand_losses.append(loss.value(sf.forward_operator(geom, p).matrix))
        best = (0.0, np.pi)[int(np.argmin(cand_losses))]
        assert rep.final_profile.phases[0][0] == best


def test_refinement_monotone_and_beats_random():
    geom = grid_stack(4, 4, layers=2)
    loss = sf.MatrixFit(
        0.05 * (np.cos(np.arange(256)) + 1j * np.sin(np.arange(256))).reshape(16, 16),
        fit_scale=True,
    )
    init = sf.quantize_phases(sf.random_profile(geom, 21), 1)
    rep = sf.successive_refinement(geom, init, loss, sweeps=3)
    assert np.all(np.diff(rep.loss_history) <= 0.0)
    assert rep.final_loss == rep.loss_history[-1] == rep.loss_history.min()
    assert rep.final_profile.codebook_bits == 1

    randoms = []
    for s in range(100):
        p = sf.quantize_phases(sf.random_profile(geom, 500 + s), 1)
        chain = stack_chain(geom, p)
        randoms.append(loss.value(chain.operator(p.phases)))
    assert rep.final_loss <= min(randoms)


def test_refinement_requires_codebook():
    geom = grid_stack(3, 3, layers=1)
    prof = sf.random_profile(geom, 1)
    with pytest.raises(InvalidParameter):
        sf.successive_refinement(geom, prof, sf.InterferenceLeakage(), sweeps=1)


def test_refinement_stops_when_pass_makes_no_change():
    geom = grid_stack(3, 3, layers=1)
    loss = make_loss("MatrixFit", geom, seed=6)
    init = sf.quantize_phases(sf.random_profile(geom, 2), 1)
    rep = sf.successive_refinement(geom, init, loss, sweeps=50)
    assert rep.metrics["sweeps_run"] < 50


def test_train_config_validation():
    with pytest.raises(InvalidParameter):
        sf.TrainConfig(max_iters=-1, step_size=1.0)
    with pytest.raises(InvalidParameter):
        sf.TrainConfig(max_iters=1, step_size=0.0)
    with pytest.raises(InvalidParameter):
        sf.TrainConfig(max_iters=1, step_size=1.0, step_decay=0.0)
    with pytest.raises(InvalidParameter):
        sf.TrainConfig(max_iters=1, step_size=1.0, step_decay=1.5)
    with pytest.raises(InvalidParameter):
        sf.TrainConfig(max_iters=1, step_size=1.0, gradient_mode="nesterov")
    with pytest.raises(InvalidParameter):
        sf.TrainConfig(max_iters=1, step_size=1.0, fd_epsilon=0.0)


def test_stop_window_triggers():
    geom = small_stack(seed=16)
    prof = sf.random_profile(geom, 2)
    loss = make_loss("MatrixFit", geom, seed=8)
    cfg = sf.TrainConfig(max_iters=5000, step_size=1e-9, tolerance=1e-3)
    rep = sf.gradient_descent(geom, prof, loss, cfg)
    assert rep.iterations_run <= 12  # window closes right after it fills


def test_fd_mode_in_descent():
    geom = grid_stack(2, 2, layers=1)
    prof = sf.random_profile(geom, 3)
    loss = make_loss("MatrixFit", geom, seed=9)
    cfg_a = sf.TrainConfig(max_iters=10, step_size=2.0, gradient_mode="analytic")
    cfg_f = sf.TrainConfig(max_iters=10, step_size=2.0, gradient_mode="finite_difference")
    ra = sf.gradient_descent(geom, prof, loss, cfg_a)
    rf = sf.gradient_descent(geom, prof, loss, cfg_f)
    assert abs(ra.final_loss - rf.final_loss) / abs(ra.final_loss) < 1e-4

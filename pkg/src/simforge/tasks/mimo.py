"""MIMO experiments: parallel-stream diagonalization and sum-rate beamforming."""

import numpy as np

from ..diffraction import stack_matrices
from ..errors import InvalidParameter, ShapeError
from ..losses import InterferenceLeakage, NegSumRate
from ..optimize import TrainReport, descend_chain
from ..stack import PhaseChain, PhaseProfile, random_profile

WATERFILL_RESIDUAL = 1e-9


def waterfill(gains, noises, budget):
    """Water-filling power allocation over parallel channels.

    Solves p_k = max(0, mu - noises_k/gains_k) with the water level mu set
    by bisection so the powers add up to the budget (residual < 1e-9), then
    tops the active set up to the exact budget.
    """
    gains = np.asarray(gains, dtype=float)
    noises = np.asarray(noises, dtype=float)
    if gains.size == 0:
        raise InvalidParameter("waterfill needs at least one channel")
    if gains.shape != noises.shape:
        raise ShapeError("gains and noises must have the same length")
    if np.any(gains <= 0) or np.any(noises <= 0):
        raise InvalidParameter("gains and noises must be positive")
    if not (budget > 0):
        raise InvalidParameter("budget must be positive")

    floor = noises / gains
    lo = float(floor.min())
    hi = float(floor.max()) + budget
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        p = np.maximum(0.0, mu - floor)
        resid = p.sum() - budget
        if abs(resid) < WATERFILL_RESIDUAL:
            break
        if resid > 0:
            hi = mu
        else:
            lo = mu
    active = p > 0
    if not np.any(active):
        active = floor == lo
    p[active] += (budget - p.sum()) / active.sum()
    return np.maximum(p, 0.0)


def sum_rate(effective_channel, powers, noise_power):
    """Sum of per-user rates, single stream per user, interference as noise."""
    h = np.asarray(effective_channel, dtype=complex)
    p = np.asarray(powers, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError("effective channel must be square")
    if p.size != h.shape[0]:
        raise ShapeError("powers length must match the channel size")
    sq = np.abs(h) ** 2
    sig = p * np.diag(sq)
    interf = sq @ p - sig
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log2(1.0 + sig / (noise_power + interf))))


def stream_isolation_db(h):
    """Per-stream ratio of direct power to received interference, in dB."""
    sq = np.abs(np.asarray(h)) ** 2
    direct = np.diag(sq)
    interf = sq.sum(axis=1) - direct
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(direct / interf)


def link_chain(geom_tx, geom_rx, channel, prof_tx, prof_rx):
    """Cascade of a transmit stack, an inter-stack channel, and a receive stack.

    The channel bridges the last transmit layer to the first receive layer,
    replacing both stacks' outer port hops on that side. For a line-of-sight
    channel the separation of the two planes comes from the channel's
    link_gap_m parameter (each stack keeps its own local axial origin).
    """
    tx_mats = [m.entries for m in stack_matrices(geom_tx, skip_observation=True)]
    rx_mats = [m.entries for m in stack_matrices(geom_rx, skip_source=True)]
    tx_pts = geom_tx.layer_positions(geom_tx.num_layers - 1)
    rx_pts = geom_rx.layer_positions(0).copy()
    if channel.kind == "los":
        gap = channel.params.get("link_gap_m")
        if gap is None or not (gap > 0):
            raise InvalidParameter("a line-of-sight link needs a positive link_gap_m")
        rx_pts[:, 2] = tx_pts[0, 2] + gap
    bridge = channel.matrix(
        tx_pts,
        rx_pts,
        geom_tx.layers[-1].meta_atom_area_m2,
        geom_tx.lambda_m,
    )
    fixed = tx_mats + [bridge] + rx_mats
    amps = prof_tx.amplitudes + prof_rx.amplitudes
    trainable = prof_tx.trainable + prof_rx.trainable
    return PhaseChain(fixed, amps, trainable)


def diagonalize_mimo(geom_tx, geom_rx, channel, cfg, init_tx=None, init_rx=None):
    """Jointly train both stacks to cancel inter-stream interference.

    Minimizes the total off-diagonal power of the end-to-end stream matrix.
    Returns the training report (over the concatenated tx+rx profile) and a
    leakage report comparing per-stream isolation before and after.
    """
    n_streams = geom_tx.source_points.shape[0]
    if geom_rx.observation_points.shape[0] != n_streams:
        raise ShapeError("transmit and receive port counts must match")
    prof_tx = init_tx if init_tx is not None else random_profile(geom_tx, cfg.seed)
    prof_rx = init_rx if init_rx is not None else random_profile(geom_rx, cfg.seed + 1)
    chain = link_chain(geom_tx, geom_rx, channel, prof_tx, prof_rx)
    loss = InterferenceLeakage()

    phases0 = prof_tx.phases + prof_rx.phases
    h_init = chain.operator(phases0)
    out = descend_chain(chain, phases0, loss, cfg)

    n_tx = prof_tx.num_layers
    best = out["best_phases"]
    trained_tx = prof_tx.with_phases(best[:n_tx])
    trained_rx = prof_rx.with_phases(best[n_tx:])
    combined = PhaseProfile(
        phases=[p.copy() for p in best],
        amplitudes=prof_tx.amplitudes + prof_rx.amplitudes,
        trainable=prof_tx.trainable + prof_rx.trainable,
    )
    h_final = chain.operator(best)
    report = TrainReport(
        loss_history=out["history"],
        final_loss=float(out["history"][-1]),
        iterations_run=out["iterations"],
        final_profile=combined,
        metrics={"best_loss": out["best_val"], "streams": float(n_streams)},
        config_echo=cfg,
    )
    if out["diverged"]:
        report.metrics["diverged"] = 1.0
    leakage = {
        "matrix": h_final,
        "untrained_matrix": h_init,
        "per_stream_ratio_db": stream_isolation_db(h_final),
        "untrained_ratio_db": stream_isolation_db(h_init),
        "tx_profile": trained_tx,
        "rx_profile": trained_rx,
    }
    return report, leakage


def sum_rate_train(geom, noise_power, power_budget, cfg, rounds=3, bridge=None, init=None):
    """Alternate water-filling power allocation with phase descent on the rate.

    bridge optionally replaces the last free-space hop (for a fading channel
    between the final layer and the users). Returns the final training
    report plus the allocation trajectory.
    """
    if rounds < 1:
        raise InvalidParameter("rounds must be >= 1")
    n_users = geom.observation_points.shape[0]
    if geom.source_points.shape[0] != n_users:
        raise ShapeError("sum-rate training needs as many feeds as users")
    prof = init if init is not None else random_profile(geom, cfg.seed)
    mats = [m.entries for m in stack_matrices(geom, skip_observation=bridge is not None)]
    if bridge is not None:
        mats = mats + [np.asarray(bridge, dtype=complex)]
    chain = PhaseChain(mats, prof.amplitudes, prof.trainable)

    phases = [p.copy() for p in prof.phases]
    powers = np.full(n_users, power_budget / n_users)
    history = []
    rates = []
    power_steps = []
    iterations = 0
    for _ in range(rounds):
        h = chain.operator(phases)
        sq = np.abs(h) ** 2
        sig = np.diag(sq)
        interf = sq @ powers - powers * sig
        powers = waterfill(sig, noise_power + interf, power_budget)
        power_steps.append(powers.copy())
        loss = NegSumRate(powers, noise_power, power_budget)
        out = descend_chain(chain, phases, loss, cfg)
        phases = out["best_phases"]
        history.extend(out["history"].tolist())
        iterations += out["iterations"]
        rates.append(sum_rate(chain.operator(phases), powers, noise_power))

    final_prof = prof.with_phases(phases, codebook_bits=None)
    h_final = chain.operator(phases)
    report = TrainReport(
        loss_history=np.asarray(history),
        final_loss=float(history[-1]),
        iterations_run=iterations,
        final_profile=final_prof,
        metrics={"sum_rate_bits": rates[-1], "rounds": float(rounds)},
        config_echo=cfg,
    )
    detail = {
        "powers": powers,
        "rates_per_round": np.asarray(rates),
        "power_steps": power_steps,
        "effective_channel": h_final,
    }
    return report, detail

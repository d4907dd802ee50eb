"""Phase training: projected gradient descent and discrete successive refinement.

Descent runs on the wrapped circle (phases are taken mod 2 pi after every
step, matching the periodic feasible set) with a fixed step shrunk by a
multiplicative decay, and returns the best profile seen. Successive
refinement is coordinate descent over the discrete codebook: atoms are
visited layer-major, row-major, every codebook phase is scored through a
rank-one operator update, and the argmin is kept, so the loss can never
increase between single-atom updates.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NonFiniteLoss
from .losses import chain_fd_gradient, chain_loss_and_gradient, chain_loss_value
from .stack import PhaseProfile, stack_chain, wrap_phase

STOP_WINDOW = 10


@dataclass(frozen=True)
class TrainConfig:
    max_iters: int
    step_size: float
    step_decay: float = 1.0
    tolerance: float = 0.0
    seed: int = 0
    gradient_mode: str = "analytic"
    fd_epsilon: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 0:
            raise InvalidParameter("max_iters must be >= 0")
        if not (self.step_size > 0):
            raise InvalidParameter("step_size must be positive")
        if not (0 < self.step_decay <= 1):
            raise InvalidParameter("step_decay must lie in (0, 1]")
        if self.tolerance < 0:
            raise InvalidParameter("tolerance must be >= 0")
        if self.gradient_mode not in ("analytic", "finite_difference"):
            raise InvalidParameter(f"unknown gradient_mode {self.gradient_mode!r}")
        if not (self.fd_epsilon > 0):
            raise InvalidParameter("fd_epsilon must be positive")


@dataclass
class TrainReport:
    loss_history: np.ndarray
    final_loss: float
    iterations_run: int
    final_profile: PhaseProfile
    metrics: dict = field(default_factory=dict)
    config_echo: object = None


def _window_converged(best_series, tolerance):
    if len(best_series) <= STOP_WINDOW:
        return False
    prev = best_series[-1 - STOP_WINDOW]
    drop = prev - best_series[-1]
    return drop < tolerance * max(abs(prev), 1e-300)


def descend_chain(chain, phases0, loss, cfg):
    """Core descent loop on a PhaseChain; returns raw results for wrapping.

    A non-finite loss mid-run stops the loop and flags divergence instead of
    raising, preserving the best point found so far.
    """
    phases = [np.asarray(p, dtype=float).copy() for p in phases0]
    masks = chain.trainable
    diverged = False
    history = [chain_loss_value(chain, phases, loss)]
    best_val = history[0]
    best_phases = [p.copy() for p in phases]
    best_series = [best_val]
    iterations = 0
    for it in range(cfg.max_iters):
        try:
            if cfg.gradient_mode == "analytic":
                _, grads = chain_loss_and_gradient(chain, phases, loss)
            else:
                grads = chain_fd_gradient(chain, phases, loss, cfg.fd_epsilon)
            step = cfg.step_size * cfg.step_decay**it
            for l in range(chain.num_layers):
                upd = phases[l] - step * np.where(masks[l], grads[l], 0.0)
                phases[l] = np.where(masks[l], wrap_phase(upd), phases[l])
            val = chain_loss_value(chain, phases, loss)
        except NonFiniteLoss:
            diverged = True
            iterations = it + 1
            break
        history.append(val)
        iterations = it + 1
        if val < best_val:
            best_val = val
            best_phases = [p.copy() for p in phases]
        best_series.append(best_val)
        if _window_converged(best_series, cfg.tolerance):
            break
    return {
        "history": np.asarray(history),
        "best_phases": best_phases,
        "best_val": best_val,
        "iterations": iterations,
        "diverged": diverged,
    }


def gradient_descent(geom, init, loss, cfg):
    """Train one stack's phases by projected gradient descent."""
    chain = stack_chain(geom, init)
    out = descend_chain(chain, init.phases, loss, cfg)
    profile = init.with_phases(out["best_phases"], codebook_bits=None)
    metrics = {"best_loss": out["best_val"]}
    if out["diverged"]:
        metrics["diverged"] = 1.0
    return TrainReport(
        loss_history=out["history"],
        final_loss=float(out["history"][-1]),
        iterations_run=out["iterations"],
        final_profile=profile,
        metrics=metrics,
        config_echo=cfg,
    )


def refine_chain(chain, phases0, loss, bits, sweeps):
    """Coordinate descent over the codebook on a PhaseChain.

    The running operator is maintained through exact rank-one updates; the
    current phase is always among the scored candidates, so each accepted
    update has loss <= the previous recorded value.
    """
    n_codes = 2**bits
    step = 2.0 * np.pi / n_codes
    codebook = np.arange(n_codes) * step % (2.0 * np.pi)
    phases = [np.asarray(p, dtype=float).copy() for p in phases0]
    G = chain.operator(phases)
    history = [_finite(loss.value(G))]
    sweeps_run = 0
    for _ in range(sweeps):
        changed = False
        for l in range(chain.num_layers):
            prefixes, suffixes, trans = chain.prefixes_suffixes(phases)
            p_l, s_l = prefixes[l], suffixes[l]
            amp = chain.amplitudes[l]
            for n in range(phases[l].size):
                if not chain.trainable[l][n]:
                    continue
                rank1 = np.outer(s_l[:, n], p_l[n, :])
                t_old = amp[n] * np.exp(1j * phases[l][n])
                vals = np.empty(n_codes)
                for k in range(n_codes):
                    t_new = amp[n] * np.exp(1j * codebook[k])
                    vals[k] = loss.value(G + (t_new - t_old) * rank1)
                k_best = int(np.argmin(vals))
                _finite(vals[k_best])
                if codebook[k_best] != phases[l][n]:
                    t_new = amp[n] * np.exp(1j * codebook[k_best])
                    G = G + (t_new - t_old) * rank1
                    phases[l][n] = codebook[k_best]
                    changed = True
                history.append(vals[k_best])
        sweeps_run += 1
        if not changed:
            break
    return {
        "history": np.asarray(history),
        "phases": phases,
        "sweeps_run": sweeps_run,
    }


def _finite(val):
    if not np.isfinite(val):
        raise NonFiniteLoss(f"loss evaluated to {val}")
    return val


def successive_refinement(geom, init, loss, sweeps):
    """Discrete phase tuning of one stack, one atom at a time."""
    if init.codebook_bits is None:
        raise InvalidParameter("successive refinement needs a codebook-quantized profile")
    if sweeps < 1:
        raise InvalidParameter("sweeps must be >= 1")
    chain = stack_chain(geom, init)
    out = refine_chain(chain, init.phases, loss, init.codebook_bits, sweeps)
    profile = init.with_phases(out["phases"])
    return TrainReport(
        loss_history=out["history"],
        final_loss=float(out["history"][-1]),
        iterations_run=len(out["history"]) - 1,
        final_profile=profile,
        metrics={"sweeps_run": float(out["sweeps_run"])},
        config_echo={"sweeps": sweeps, "codebook_bits": init.codebook_bits},
    )

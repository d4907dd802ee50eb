"""Experiment driver: JSON configs in, deterministic numeric artifacts out.

`simforge run <config.json>` executes one task and writes a report
(report.json), a log, and CSV tables with full round-trip precision, so a
rerun with the same config and seed reproduces the tables byte for byte.
`simforge sweep` repeats a run across values of one numeric config field.
Bundled recipe names (see recipes/) are accepted in place of a path.

Exit codes: 0 success, 2 config schema violation, 3 non-finite loss,
4 geometry warnings under --strict, 1 other task errors.
"""

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import _kernels
from .channels import ChannelModel, plane_wave_field
from .errors import ConfigError, NonFiniteLoss, SimforgeError
from .geometry import build_stack
from .optimize import TrainConfig
from .stack import forward_operator
from .tasks import (
    AssignmentProblem,
    assign_antennas,
    bin_to_sines,
    diagonalize_mimo,
    dft_matrix,
    doa_estimate,
    doa_squared_error,
    energy_routing_train,
    fit_dft,
    quadrant_beam_dataset,
    quadrant_regions,
    sum_rate_train,
)
from .diffraction import validate_geometry

TASKS = ("diagonalize", "fit-dft", "doa", "sum-rate", "classify", "assign")
REFERENCE_DOA_MSE_DB = -40.0  # reported alongside doa results, not a gate


# ---------------------------------------------------------------------------
# config schema


def _check_keys(block, allowed, required, path):
    if not isinstance(block, dict):
        raise ConfigError(path, "must be an object")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown key")
    for key in required:
        if key not in block:
            raise ConfigError(f"{path}.{key}", "missing required key")


PORT_KEYS = {
    "grid": ({"kind", "rows", "cols", "pitch_in_wavelengths"}, {"rows", "cols", "pitch_in_wavelengths"}),
    "linear": ({"kind", "count", "spacing_in_wavelengths"}, {"count", "spacing_in_wavelengths"}),
    "points": ({"kind", "points_in_wavelengths"}, {"points_in_wavelengths"}),
    "none": ({"kind"}, set()),
}


def _check_ports(spec, path):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(path, "port spec needs a 'kind'")
    kind = spec["kind"]
    if kind not in PORT_KEYS:
        raise ConfigError(f"{path}.kind", f"unknown port kind {kind!r}")
    allowed, required = PORT_KEYS[kind]
    _check_keys(spec, allowed, required | {"kind"}, path)


def _positive(block, key, path):
    v = block.get(key)
    if v is not None and (not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0):
        raise ConfigError(f"{path}.{key}", "must be a positive number")


def validate_config(cfg):
    _check_keys(
        cfg,
        {"task", "seed", "output_dir", "geometry", "train", "task_params"},
        {"task", "seed"},
        "config",
    )
    task = cfg["task"]
    if task not in TASKS:
        raise ConfigError("config.task", f"must be one of {TASKS}, got {task!r}")
    if not isinstance(cfg["seed"], int):
        raise ConfigError("config.seed", "must be an integer")

    needs_geometry = task != "assign"
    if needs_geometry:
        if "geometry" not in cfg:
            raise ConfigError("config.geometry", "missing required key")
        g = cfg["geometry"]
        _check_keys(
            g,
            {
                "frequency_hz",
                "layers",
                "pitch_in_wavelengths",
                "gaps_in_wavelengths",
                "source_ports",
                "observation_ports",
            },
            {
                "frequency_hz",
                "layers",
                "pitch_in_wavelengths",
                "gaps_in_wavelengths",
                "source_ports",
                "observation_ports",
            },
            "config.geometry",
        )
        _positive(g, "frequency_hz", "config.geometry")
        _positive(g, "pitch_in_wavelengths", "config.geometry")
        layers = g["layers"]
        if (
            not isinstance(layers, list)
            or not layers
            or any(
                not isinstance(sh, list) or len(sh) != 2 or any(int(x) < 1 for x in sh)
                for sh in layers
            )
        ):
            raise ConfigError("config.geometry.layers", "must be a nonempty list of [rows, cols]")
        gaps = g["gaps_in_wavelengths"]
        if len(gaps) != len(layers) + 1:
            raise ConfigError(
                "config.geometry.gaps_in_wavelengths",
                "must list one more gap than there are layers",
            )
        if any(not isinstance(x, (int, float)) or x <= 0 for x in gaps):
            raise ConfigError("config.geometry.gaps_in_wavelengths", "gaps must be positive")
        _check_ports(g["source_ports"], "config.geometry.source_ports")
        _check_ports(g["observation_ports"], "config.geometry.observation_ports")

    if "train" in cfg:
        _check_keys(
            cfg["train"],
            {"max_iters", "step_size", "step_decay", "tolerance", "gradient_mode", "fd_epsilon"},
            {"max_iters", "step_size"},
            "config.train",
        )

    params = cfg.get("task_params", {})
    allowed = {
        "diagonalize": {"link_gap_in_wavelengths", "channel"},
        "fit-dft": {"depths", "spectrum_sources"},
        "doa": {"sources", "num_sources", "snapshots", "operator", "snr_db"},
        "sum-rate": {"noise_power", "power_budget", "rounds", "channel"},
        "classify": {"train_per_class", "heldout_per_class", "dataset_seed", "sine_lo", "sine_hi"},
        "assign": {"gains", "random", "method"},
    }[task]
    required = {
        "diagonalize": {"link_gap_in_wavelengths"},
        "fit-dft": set(),
        "doa": {"sources", "num_sources", "snapshots"},
        "sum-rate": {"noise_power", "power_budget"},
        "classify": {"train_per_class"},
        "assign": {"method"},
    }[task]
    _check_keys(params, allowed, required, "config.task_params")
    _validate_task_params(task, params)
    if task in ("diagonalize", "fit-dft", "doa", "sum-rate", "classify"):
        if task == "doa" and params.get("operator", "trained") == "ideal":
            pass
        elif "train" not in cfg:
            raise ConfigError("config.train", f"task {task!r} requires a train block")
    return cfg


def _validate_task_params(task, params):
    path = "config.task_params"
    if task == "diagonalize":
        _positive(params, "link_gap_in_wavelengths", path)
    elif task == "fit-dft":
        depths = params.get("depths")
        if depths is not None and (
            not isinstance(depths, list)
            or not depths
            or any(not isinstance(d, int) or d < 1 for d in depths)
        ):
            raise ConfigError(f"{path}.depths", "must be a nonempty list of positive integers")
    elif task == "doa":
        sources = params["sources"]
        if not isinstance(sources, list) or any(
            not isinstance(s, list) or len(s) not in (2, 3) for s in sources
        ):
            raise ConfigError(f"{path}.sources", "must be a list of [az_deg, el_deg(, amplitude)]")
        for key in ("num_sources", "snapshots"):
            if not isinstance(params[key], int) or params[key] < 1:
                raise ConfigError(f"{path}.{key}", "must be a positive integer")
        if params.get("operator", "trained") not in ("trained", "ideal"):
            raise ConfigError(f"{path}.operator", "must be 'trained' or 'ideal'")
    elif task == "sum-rate":
        _positive(params, "noise_power", path)
        _positive(params, "power_budget", path)
        _positive(params, "rounds", path)
    elif task == "classify":
        _positive(params, "train_per_class", path)
        _positive(params, "heldout_per_class", path)
    elif task == "assign":
        if params["method"] not in ("greedy", "exhaustive", "both"):
            raise ConfigError(f"{path}.method", "must be 'greedy', 'exhaustive' or 'both'")
        if "gains" in params and "random" in params:
            raise ConfigError(f"{path}.gains", "give either explicit gains or a random spec")


def load_config(path_or_name):
    p = Path(path_or_name)
    if p.is_file():
        text = p.read_text()
    else:
        recipe = resources.files("simforge.recipes").joinpath(f"{path_or_name}.json")
        if not recipe.is_file():
            raise ConfigError("config", f"no such file or bundled recipe: {path_or_name}")
        text = recipe.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    return validate_config(cfg)


def train_config(cfg):
    t = cfg["train"]
    return TrainConfig(
        max_iters=int(t["max_iters"]),
        step_size=float(t["step_size"]),
        step_decay=float(t.get("step_decay", 1.0)),
        tolerance=float(t.get("tolerance", 0.0)),
        seed=int(cfg["seed"]),
        gradient_mode=t.get("gradient_mode", "analytic"),
        fd_epsilon=float(t.get("fd_epsilon", 1e-6)),
    )


def stack_from_config(cfg, source=None, observation=None, layers=None, gaps=None):
    g = cfg["geometry"]
    return build_stack(
        frequency_hz=float(g["frequency_hz"]),
        layer_shapes=layers if layers is not None else g["layers"],
        pitch_in_wavelengths=float(g["pitch_in_wavelengths"]),
        gaps_in_wavelengths=gaps if gaps is not None else g["gaps_in_wavelengths"],
        source_spec=source if source is not None else g["source_ports"],
        observation_spec=observation if observation is not None else g["observation_ports"],
    )


# ---------------------------------------------------------------------------
# artifact writing


def fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


class RunWriter:
    """Collects log lines and numeric tables under one output directory."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._log = []

    def log(self, line):
        self._log.append(line)

    def table(self, name, header, rows):
        path = self.out_dir / name
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(fmt(x) for x in row))
        path.write_text("\n".join(lines) + "\n")
        self.log(f"wrote {name} ({len(rows)} rows)")

    def complex_table(self, name, matrix):
        m = np.asarray(matrix)
        header = ["row"] + [f"col{j}_re" for j in range(m.shape[1])]
        header += [f"col{j}_im" for j in range(m.shape[1])]
        rows = []
        for i in range(m.shape[0]):
            rows.append([i] + [v.real for v in m[i]] + [v.imag for v in m[i]])
        self.table(name, header, rows)

    def finish(self, cfg, metrics, warnings):
        report = {
            "config": cfg,
            "metrics": {k: metrics[k] for k in sorted(metrics)},
            "geometry_warnings": warnings,
            "kernel_backend": _kernels.backend_name(),
        }
        (self.out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        (self.out_dir / "log.txt").write_text("\n".join(self._log) + "\n")
        return report


def write_profile_tables(writer, prefix, profile):
    for l, (ph, amp) in enumerate(zip(profile.phases, profile.amplitudes)):
        rows = [[n, ph[n], amp[n]] for n in range(ph.size)]
        writer.table(f"{prefix}_layer{l + 1}.csv", ["atom", "phase_rad", "amplitude"], rows)


def write_history(writer, name, history):
    writer.table(name, ["iteration", "loss"], [[i, v] for i, v in enumerate(history)])


# ---------------------------------------------------------------------------
# task runners


def degrees_sources(raw):
    return [(np.deg2rad(s[0]), np.deg2rad(s[1]), float(s[2]) if len(s) > 2 else 1.0) for s in raw]


def run_diagonalize(cfg, writer):
    params = cfg["task_params"]
    geom_tx = stack_from_config(cfg, observation={"kind": "none"})
    geom_rx = stack_from_config(cfg, source={"kind": "none"})
    ch_spec = params.get("channel", {"kind": "los"})
    kind = ch_spec.get("kind", "los")
    ch_params = {}
    if kind == "los":
        ch_params["link_gap_m"] = float(params["link_gap_in_wavelengths"]) * geom_tx.lambda_m
    else:
        ch_params["variance"] = float(ch_spec.get("variance", 1.0))
        ch_params["seed"] = int(ch_spec.get("seed", cfg["seed"]))
    channel = ChannelModel(kind, ch_params)
    tcfg = train_config(cfg)

    report, leak = diagonalize_mimo(geom_tx, geom_rx, channel, tcfg)
    h = leak["matrix"]
    writer.table(
        "end2end_magnitude.csv",
        ["stream"] + [f"tx{j}" for j in range(h.shape[1])],
        [[i] + list(np.abs(h[i])) for i in range(h.shape[0])],
    )
    writer.complex_table("end2end_complex.csv", h)
    writer.table(
        "isolation_db.csv",
        ["stream", "trained_db", "untrained_db"],
        [
            [s, leak["per_stream_ratio_db"][s], leak["untrained_ratio_db"][s]]
            for s in range(h.shape[0])
        ],
    )
    write_history(writer, "loss_history.csv", report.loss_history)
    write_profile_tables(writer, "phases_tx", leak["tx_profile"])
    write_profile_tables(writer, "phases_rx", leak["rx_profile"])
    finite_iso = leak["per_stream_ratio_db"][np.isfinite(leak["per_stream_ratio_db"])]
    metrics = {
        "final_loss": float(report.final_loss),
        "best_loss": float(report.metrics["best_loss"]),
        "min_isolation_db": float(finite_iso.min()) if finite_iso.size else float("inf"),
        "min_improvement_db": float(
            (leak["per_stream_ratio_db"] - leak["untrained_ratio_db"]).min()
        ),
        "iterations_run": float(report.iterations_run),
    }
    warnings = validate_geometry(geom_tx)
    return metrics, warnings


def run_fit_dft(cfg, writer):
    params = cfg.get("task_params", {})
    g = cfg["geometry"]
    depths = [int(d) for d in params.get("depths", [len(g["layers"])])]
    spectrum_sources = degrees_sources(
        params.get("spectrum_sources", [[14.0, 9.0, 1.0], [-21.0, -15.0, 1.0]])
    )
    base_layers = g["layers"]
    base_gaps = g["gaps_in_wavelengths"]
    tcfg = train_config(cfg)
    metrics = {}
    warnings = []
    summary_rows = []
    for depth in depths:
        layers = [base_layers[0]] * depth
        gaps = [base_gaps[0]] + [base_gaps[1] if len(base_gaps) > 2 else base_gaps[0]] * (
            depth - 1
        ) + [base_gaps[-1]]
        geom = stack_from_config(cfg, layers=layers, gaps=gaps)
        warnings.extend(f"depth {depth}: {w}" for w in validate_geometry(geom))
        rep = fit_dft(geom, tcfg)
        err = rep.metrics["normalized_fit_error"]
        metrics[f"normalized_fit_error_L{depth}"] = float(err)
        summary_rows.append([depth, err, rep.final_loss, rep.iterations_run])
        write_history(writer, f"loss_history_L{depth}.csv", rep.loss_history)
        write_profile_tables(writer, f"phases_L{depth}", rep.final_profile)

        grid = geom.source_grid
        op = forward_operator(geom, rep.final_profile).matrix
        field = np.zeros(grid.count, dtype=complex)
        for az, el, amp in spectrum_sources:
            field = field + amp * plane_wave_field(geom.source_points, az, el, geom.lambda_m)
        spec = np.abs(op @ field) ** 2
        ideal = np.abs(dft_matrix(grid.rows, grid.cols) @ field) ** 2
        rows = []
        for b in range(grid.count):
            u, v = bin_to_sines(b // grid.cols, b % grid.cols, grid.rows, grid.cols, grid.pitch_m, geom.lambda_m)
            rows.append([b, b // grid.cols, b % grid.cols, u, v, spec[b], ideal[b]])
        writer.table(
            f"spectrum_L{depth}.csv",
            ["bin", "p", "q", "u", "v", "trained_intensity", "ideal_intensity"],
            rows,
        )
    writer.table(
        "summary.csv",
        ["depth", "normalized_fit_error", "final_loss", "iterations_run"],
        summary_rows,
    )
    metrics["normalized_fit_error"] = float(summary_rows[-1][1])
    return metrics, warnings


def run_doa(cfg, writer):
    params = cfg["task_params"]
    geom = stack_from_config(cfg)
    sources = degrees_sources(params["sources"])
    k = int(params["num_sources"])
    snapshots = int(params["snapshots"])
    snr_db = params.get("snr_db")
    warnings = validate_geometry(geom)
    metrics = {"reference_mse_db": REFERENCE_DOA_MSE_DB}
    operator = None
    if params.get("operator", "trained") == "ideal":
        grid = geom.source_grid
        operator = dft_matrix(grid.rows, grid.cols)
    else:
        rep = fit_dft(geom, train_config(cfg))
        metrics["normalized_fit_error"] = float(rep.metrics["normalized_fit_error"])
        write_history(writer, "loss_history.csv", rep.loss_history)
        operator = forward_operator(geom, rep.final_profile).matrix
        write_profile_tables(writer, "phases", rep.final_profile)

    est = doa_estimate(
        geom,
        None,
        sources,
        k,
        snapshots,
        seed=cfg["seed"],
        operator=operator,
        snr_db=snr_db,
    )
    grid = geom.source_grid
    rows = []
    for i, b in enumerate(est.region_bins):
        u, v = bin_to_sines(b // grid.cols, b % grid.cols, grid.rows, grid.cols, grid.pitch_m, geom.lambda_m)
        rows.append([int(b), b // grid.cols, b % grid.cols, u, v, est.spectrum[i]])
    writer.table("spectrum.csv", ["bin", "p", "q", "u", "v", "intensity"], rows)
    writer.table(
        "estimates.csv",
        ["rank", "bin", "azimuth_deg", "elevation_deg"],
        [
            [i, est.bin_indices[i], np.rad2deg(az), np.rad2deg(el)]
            for i, (az, el) in enumerate(est.angles)
        ],
    )
    if len(sources) == k:
        mse = doa_squared_error(sources, est)
        metrics["mse_sine_space"] = float(mse)
        metrics["mse_db"] = float(10 * np.log10(mse)) if mse > 0 else float("-inf")
    metrics["snapshots"] = float(snapshots)
    return metrics, warnings


def run_sum_rate(cfg, writer):
    params = cfg["task_params"]
    geom = stack_from_config(cfg)
    tcfg = train_config(cfg)
    rounds = int(params.get("rounds", 3))
    bridge = None
    ch_spec = params.get("channel", {"kind": "los"})
    if ch_spec.get("kind", "los") == "rayleigh":
        ch = ChannelModel(
            "rayleigh",
            {
                "variance": float(ch_spec.get("variance", 1.0)),
                "seed": int(ch_spec.get("seed", cfg["seed"])),
            },
        )
        bridge = ch.matrix(
            geom.layer_positions(geom.num_layers - 1),
            geom.observation_points,
            geom.layers[-1].meta_atom_area_m2,
            geom.lambda_m,
        )
    report, detail = sum_rate_train(
        geom,
        noise_power=float(params["noise_power"]),
        power_budget=float(params["power_budget"]),
        cfg=tcfg,
        rounds=rounds,
        bridge=bridge,
    )
    writer.table(
        "rates.csv",
        ["round", "sum_rate_bits"],
        [[i, r] for i, r in enumerate(detail["rates_per_round"])],
    )
    writer.table(
        "powers.csv",
        ["user", "power"],
        [[i, p] for i, p in enumerate(detail["powers"])],
    )
    h = detail["effective_channel"]
    writer.table(
        "channel_magnitude.csv",
        ["user"] + [f"feed{j}" for j in range(h.shape[1])],
        [[i] + list(np.abs(h[i])) for i in range(h.shape[0])],
    )
    write_history(writer, "loss_history.csv", report.loss_history)
    write_profile_tables(writer, "phases", report.final_profile)
    metrics = {
        "sum_rate_bits": float(report.metrics["sum_rate_bits"]),
        "final_loss": float(report.final_loss),
        "power_residual": float(abs(detail["powers"].sum() - float(params["power_budget"]))),
    }
    return metrics, validate_geometry(geom)


def run_classify(cfg, writer):
    params = cfg["task_params"]
    geom = stack_from_config(cfg)
    if geom.observation_grid is None:
        raise ConfigError("config.geometry.observation_ports", "classify needs grid ports")
    regions = quadrant_regions(geom.observation_grid)
    dataset_seed = int(params.get("dataset_seed", cfg["seed"]))
    lo = float(params.get("sine_lo", 0.15))
    hi = float(params.get("sine_hi", 0.6))
    train = quadrant_beam_dataset(geom, int(params["train_per_class"]), dataset_seed, lo, hi)
    heldout = None
    if params.get("heldout_per_class"):
        heldout = quadrant_beam_dataset(
            geom, int(params["heldout_per_class"]), dataset_seed + 1, lo, hi
        )
    rep = energy_routing_train(geom, regions, train, train_config(cfg), heldout=heldout)
    write_history(writer, "loss_history.csv", rep.loss_history)
    write_profile_tables(writer, "phases", rep.final_profile)

    op = forward_operator(geom, rep.final_profile).matrix
    eval_in, eval_lab = heldout if heldout is not None else train
    from .losses import EnergyRoutingCE

    helper = EnergyRoutingCE(eval_in, eval_lab, regions)
    energies = helper.region_energies(eval_in @ op.T)
    rows = []
    for i in range(eval_lab.size):
        rows.append([i, int(eval_lab[i]), int(np.argmax(energies[i]))] + list(energies[i]))
    writer.table(
        "region_energies.csv",
        ["sample", "label", "predicted"] + [f"region{c}" for c in range(len(regions))],
        rows,
    )
    metrics = {
        "final_loss": float(rep.final_loss),
        "train_accuracy": float(rep.metrics["train_accuracy"]),
    }
    if heldout is not None:
        metrics["heldout_accuracy"] = float(rep.metrics["heldout_accuracy"])
    return metrics, validate_geometry(geom)


def run_assign(cfg, writer):
    params = cfg["task_params"]
    if "gains" in params:
        gains = np.asarray(params["gains"], dtype=float)
    else:
        spec = params.get("random", {})
        rng = np.random.default_rng(int(spec.get("seed", cfg["seed"])))
        gains = rng.uniform(0.0, 1.0, (int(spec.get("antennas", 6)), int(spec.get("users", 3))))
    problem = AssignmentProblem(gains)
    writer.table(
        "gains.csv",
        ["antenna"] + [f"user{u}" for u in range(gains.shape[1])],
        [[a] + list(gains[a]) for a in range(gains.shape[0])],
    )
    metrics = {}
    methods = ["greedy", "exhaustive"] if params["method"] == "both" else [params["method"]]
    for method in methods:
        assign, obj = assign_antennas(problem, method)
        writer.table(
            f"assignment_{method}.csv",
            ["user", "antenna", "gain"],
            [[u, int(assign[u]), gains[assign[u], u]] for u in range(gains.shape[1])],
        )
        metrics[f"objective_{method}"] = float(obj)
    return metrics, []


RUNNERS = {
    "diagonalize": run_diagonalize,
    "fit-dft": run_fit_dft,
    "doa": run_doa,
    "sum-rate": run_sum_rate,
    "classify": run_classify,
    "assign": run_assign,
}


def run(config_path, strict=False, out_dir=None):
    """Execute one experiment; returns the process exit code."""
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    target = Path(out_dir or cfg.get("output_dir", "runs/" + cfg["task"]))
    writer = RunWriter(target)
    writer.log(f"task {cfg['task']} seed {cfg['seed']} backend {_kernels.backend_name()}")
    try:
        metrics, warnings = RUNNERS[cfg["task"]](cfg, writer)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonFiniteLoss as exc:
        print(f"non-finite loss: {exc}", file=sys.stderr)
        return 3
    except SimforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for w in warnings:
        writer.log(f"geometry warning: {w}")
    writer.finish(cfg, metrics, warnings)
    print(f"{cfg['task']}: " + "  ".join(f"{k}={fmt(v)}" for k, v in sorted(metrics.items())))
    print(f"artifacts in {target}")
    if strict and warnings:
        print("geometry warnings escalated by --strict", file=sys.stderr)
        return 4
    return 0


def _set_axis(cfg, axis, value):
    if axis in ("layers", "geometry.layers"):
        if not float(value).is_integer() or int(value) < 1:
            raise ConfigError("config.geometry.layers", "layer count must be a positive integer")
        base = cfg["geometry"]["layers"][0]
        depth = int(value)
        cfg["geometry"]["layers"] = [base] * depth
        gaps = cfg["geometry"]["gaps_in_wavelengths"]
        inner = gaps[1] if len(gaps) > 2 else gaps[0]
        cfg["geometry"]["gaps_in_wavelengths"] = [gaps[0]] + [inner] * (depth - 1) + [gaps[-1]]
        return
    node = cfg
    parts = axis.split(".")
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"config.{axis}", "axis path not present in config")
        node = node[part]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"config.{axis}", "axis path not present in config")
    if not isinstance(node[leaf], (int, float)) or isinstance(node[leaf], bool):
        raise ConfigError(f"config.{axis}", "axis must name a numeric field")
    node[leaf] = int(value) if isinstance(node[leaf], int) and float(value).is_integer() else float(value)


def sweep(config_path, axis, values, strict=False, out_dir=None):
    """Run the task once per axis value; aggregate final metrics into one table."""
    try:
        base = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    target = Path(out_dir or base.get("output_dir", "runs/" + base["task"])) / "sweep"
    target.mkdir(parents=True, exist_ok=True)
    rows = []
    keys = []
    for i, value in enumerate(values):
        cfg = json.loads(json.dumps(base))
        try:
            _set_axis(cfg, axis, value)
            validate_config(cfg)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        run_dir = target / f"value_{i:03d}"
        writer = RunWriter(run_dir)
        writer.log(f"sweep {axis}={value}")
        try:
            metrics, warnings = RUNNERS[cfg["task"]](cfg, writer)
        except NonFiniteLoss as exc:
            print(f"non-finite loss at {axis}={value}: {exc}", file=sys.stderr)
            return 3
        except SimforgeError as exc:
            print(f"error at {axis}={value}: {exc}", file=sys.stderr)
            return 1
        writer.finish(cfg, metrics, warnings)
        if strict and warnings:
            print(f"geometry warnings escalated by --strict at {axis}={value}", file=sys.stderr)
            return 4
        for k in sorted(metrics):
            if k not in keys:
                keys.append(k)
        rows.append((value, metrics))
    table_lines = [",".join([axis] + keys)]
    for value, metrics in rows:
        table_lines.append(",".join([fmt(value)] + [fmt(metrics.get(k, "")) for k in keys]))
    (target / "sweep.csv").write_text("\n".join(table_lines) + "\n")
    print(f"sweep table in {target / 'sweep.csv'} ({len(rows)} rows)")
    return 0


def _parse_values(text):
    out = []
    if text.strip() == "":
        return out
    for piece in text.split(","):
        piece = piece.strip()
        out.append(float(piece))
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(prog="simforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to a config JSON or a bundled recipe name")
    p_run.add_argument("--strict", action="store_true", help="fail on geometry warnings")
    p_run.add_argument("--out", default=None, help="output directory override")

    p_sweep = sub.add_parser("sweep", help="repeat a run across values of one field")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", required=True, help="dotted config field, e.g. train.step_size")
    p_sweep.add_argument("--values", required=True, help="comma-separated numeric values")
    p_sweep.add_argument("--strict", action="store_true")
    p_sweep.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, strict=args.strict, out_dir=args.out)
    return sweep(
        args.config,
        axis=args.axis,
        values=_parse_values(args.values),
        strict=args.strict,
        out_dir=args.out,
    )


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: synth, analyze, validate, schedule, report.
Exit codes: 0 success, 1 data/validation failure, 2 usage/config error,
3 I/O error. Every stochastic step is driven by --seed, so identical
invocations produce byte-identical output files.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import experiments as ex
from . import scheduler
from .errors import ConfigError, DatasetError, InsufficientDataError, ToolkitError
from .geometry import canonical_numbering
from .synth import IID_RAYLEIGH, KRONECKER, SPARSE_MULTIPATH, ChannelModel, RngSeed, generate

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_IO = 3

MODEL_ALIASES = {
    "iid": IID_RAYLEIGH,
    "iid_rayleigh": IID_RAYLEIGH,
    "kronecker": KRONECKER,
    "kronecker_exponential": KRONECKER,
    "sparse": SPARSE_MULTIPATH,
    "sparse_multipath": SPARSE_MULTIPATH,
}

DEFAULT_SPARSE_ANGLES = (-0.6, 0.1, 0.8)
DEFAULT_SPARSE_POWERS = (1.0, 1.0, 1.0)


def _parse_int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v != ""]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}") from exc


def _atomic_write(path: Path, writer) -> None:
    """Write via a temp name and rename, so failures leave no partial file."""
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)


def _load_config(path):
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc


def _setting(args_value, section: dict, key: str, default):
    """CLI flag beats config section beats built-in default."""
    if args_value is not None:
        return args_value
    if key in section:
        return section[key]
    return default


def _build_model(kind, antennas, snapshots, freqs, rho, noise_floor,
                 angles=None, powers=None) -> ChannelModel:
    kind = MODEL_ALIASES.get(kind)
    if kind is None:
        raise ConfigError(f"unknown model; choose one of {sorted(MODEL_ALIASES)}")
    kwargs = {}
    if kind == SPARSE_MULTIPATH:
        kwargs["steering_angles"] = tuple(angles or DEFAULT_SPARSE_ANGLES)
        kwargs["path_powers"] = tuple(powers or DEFAULT_SPARSE_POWERS)
        kwargs["noise_floor"] = noise_floor
    return ChannelModel(kind=kind, num_antennas=antennas, num_snapshots=snapshots,
                        num_freqs=freqs, rho=rho, **kwargs)


def _open_source(args, config):
    section = config.get("source", {})
    dataset_path = args.dataset or section.get("dataset")
    if dataset_path:
        manifest, reader = ds.load_dataset(dataset_path)
        return ex.DatasetSource(manifest=manifest, reader=reader)
    model_cfg = section.get("model", {})
    kind = args.model or model_cfg.get("kind")
    if kind is None:
        raise ConfigError("no source given: pass --dataset or --model (or a config file)")
    model = _build_model(
        kind,
        _setting(args.antennas, model_cfg, "antennas", 32),
        _setting(args.snapshots, model_cfg, "snapshots", 6000),
        _setting(args.freqs, model_cfg, "freqs", 2),
        _setting(args.rho, model_cfg, "rho", 0.0),
        _setting(args.noise_floor, model_cfg, "noise_floor", 0.01),
        model_cfg.get("steering_angles"),
        model_cfg.get("path_powers"),
    )
    return ex.SyntheticSource(model=model)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args, config) -> int:
    section = config.get("synth", {})
    antennas = _setting(args.antennas, section, "antennas", 32)
    snapshots = _setting(args.snapshots, section, "snapshots", 6000)
    freqs = _setting(args.freqs, section, "freqs", 2)
    positions = _setting(args.positions, section, "positions", 10)
    if positions < 1:
        raise ConfigError("need at least one position")
    model = _build_model(
        args.model or section.get("model", "iid"),
        antennas, snapshots, freqs,
        _setting(args.rho, section, "rho", 0.0),
        _setting(args.noise_floor, section, "noise_floor", 0.01),
        section.get("steering_angles"), section.get("path_powers"))

    if args.array == "ura":
        rows = args.rows or 4
        cols = antennas // rows
        if rows * cols != antennas:
            raise ConfigError(f"--antennas {antennas} not divisible into {rows} rows")
        geometry = canonical_numbering("ura", rows, cols)
    else:
        geometry = canonical_numbering("ula", 1, antennas)

    out_dir = Path(args.out or "dataset")
    seed = RngSeed(args.seed)
    infos, tensors = [], {}
    for i in range(positions):
        pid = f"pos{i:03d}"
        tensors[pid] = generate(model, seed.spawn(i), position_id=pid)
        infos.append(ds.PositionInfo(id=pid, label=pid, los=True,
                                     num_snapshots=snapshots, file=f"{pid}.cf64"))
    manifest = ds.DatasetManifest(
        version=ds.FORMAT_VERSION,
        carrier_hz=args.carrier_hz,
        num_freqs=freqs,
        snapshot_interval_s=args.snapshot_interval,
        array=geometry,
        positions=tuple(infos),
    )
    try:
        ds.write_dataset(manifest, tensors, out_dir)
    except OSError as exc:
        print(f"error: failed to write dataset: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {positions} positions to {out_dir}")
    return EXIT_OK


def _analyze_params(args, config, source):
    m = source.num_antennas
    hardening = config.get("hardening", {})
    correlation = config.get("correlation", {})
    condition = config.get("condition", {})
    eigen = config.get("eigen", {})

    default_counts = sorted({1, 2, 4, 8, 16, min(31, m), m})
    counts = _setting(args.antenna_counts and _parse_int_list(args.antenna_counts),
                      config, "antenna_counts", default_counts)
    params = {
        "window_length": int(_setting(args.window_length, hardening, "window_length", 600)),
        "antenna_counts": [int(c) for c in counts],
        "hardening_trials": int(_setting(args.trials, hardening, "trials", 2000)),
        "correlation_trials": int(_setting(args.trials, correlation, "trials",
                                           ex.DEFAULT_CORRELATION_TRIALS)),
        "condition_trials": int(_setting(args.trials, condition, "trials",
                                         ex.DEFAULT_CONDITION_TRIALS)),
        "node_counts": [int(k) for k in _setting(
            args.node_counts and _parse_int_list(args.node_counts),
            condition, "node_counts", [2, 5, 10])],
        "p": int(_setting(args.p, eigen, "p", 3)),
        "eigen_window": int(_setting(None, eigen, "window_length", 600)),
        "eigen_windows": int(_setting(None, eigen, "num_windows", 100)),
    }
    for key in ("window_length", "hardening_trials", "correlation_trials",
                "condition_trials", "p", "eigen_window", "eigen_windows"):
        if params[key] < 1:
            raise ConfigError(f"{key} must be >= 1")
    if any(c < 1 or c > m for c in params["antenna_counts"]):
        raise ConfigError(f"antenna_counts must lie in [1, {m}]")
    if any(k < 1 for k in params["node_counts"]):
        raise ConfigError("node_counts must be positive")
    if params["eigen_window"] < params["p"]:
        raise ConfigError("eigen window_length must be >= p")
    return params


def cmd_analyze(args, config) -> int:
    source = _open_source(args, config)
    params = _analyze_params(args, config, source)
    wanted = (args.experiments.split(",") if args.experiments
              else config.get("experiments", ["hardening", "correlation",
                                              "condition", "eigen"]))
    known = {"hardening", "correlation", "condition", "eigen"}
    unknown = set(wanted) - known
    if unknown:
        raise ConfigError(f"unknown experiment(s): {sorted(unknown)}")

    out_dir = Path(args.out or "results")
    seed = RngSeed(args.seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {"seed": args.seed, "experiments": {}}

    if "hardening" in wanted:
        result = ex.run_hardening_curve(
            source, params["window_length"], params["antenna_counts"],
            params["hardening_trials"], seed.spawn(1))
        _atomic_write(out_dir / "hardening_std.csv",
                      lambda p: ex.write_curve_csv(result.std_curve, p))
        _atomic_write(out_dir / "hardening_db.csv",
                      lambda p: ex.write_curve_csv(result.hardening_curve, p))
        summary["experiments"]["hardening"] = {
            "std": ex.curve_summary(result.std_curve),
            "hardening_db": ex.curve_summary(result.hardening_curve),
            "windows": int(result.std_curve.trials[0]),
        }
        print(f"hardening: {result.std_curve.trials[0]} windows, "
              f"m={params['antenna_counts']}")

    if "correlation" in wanted:
        result = ex.run_correlation_curve(
            source, params["antenna_counts"], params["correlation_trials"],
            seed.spawn(2))
        _atomic_write(out_dir / "correlation_delta.csv",
                      lambda p: ex.write_curve_csv(result.delta_curve, p))
        _atomic_write(out_dir / "correlation_delta_sq.csv",
                      lambda p: ex.write_curve_csv(result.delta_sq_curve, p))
        summary["experiments"]["correlation"] = {
            "delta": ex.curve_summary(result.delta_curve),
            "delta_sq": ex.curve_summary(result.delta_sq_curve),
        }
        print(f"correlation: {params['correlation_trials']} draws per m")

    if "condition" in wanted:
        result = ex.run_condition_curve(
            source, params["node_counts"], source.num_antennas,
            params["condition_trials"], seed.spawn(3))
        _atomic_write(out_dir / "condition_mean.csv",
                      lambda p: ex.write_curve_csv(result.curve, p))
        for k, cdf in sorted(result.cdfs.items()):
            _atomic_write(out_dir / f"condition_cdf_K{k}.csv",
                          lambda p, c=cdf: ex.write_cdf_csv(c, p))
        summary["experiments"]["condition"] = ex.curve_summary(result.curve)
        print(f"condition: K={params['node_counts']}, "
              f"{params['condition_trials']} trials per K")

    if "eigen" in wanted:
        result = ex.run_eigen_analysis(
            source, params["eigen_window"], params["p"],
            antenna_counts=params["antenna_counts"], seed=seed.spawn(4),
            num_windows=params["eigen_windows"])

        def write_eig(path, res=result):
            import csv as _csv
            with open(path, "w", newline="") as fh:
                writer = _csv.writer(fh)
                m = res.eigenvalues_db.shape[1]
                writer.writerow(["window"] + [f"lambda{i + 1}_db" for i in range(m)])
                for w, row in enumerate(res.eigenvalues_db):
                    writer.writerow([w] + ["NA" if not np.isfinite(v) else repr(float(v))
                                           for v in row])
        _atomic_write(out_dir / "eigen_values_db.csv", write_eig)
        for (ga, gb), curve in sorted(result.chordal_curves.items()):
            _atomic_write(out_dir / f"eigen_chordal_{ga}_{gb}.csv",
                          lambda p, c=curve: ex.write_curve_csv(c, p))
        summary["experiments"]["eigen"] = {
            "windows": int(result.eigenvalues_db.shape[0]),
            "skipped": result.skipped,
            "p": params["p"],
            "energy_fraction_mean": (float(np.mean(result.energy_fractions))
                                     if result.energy_fractions.size else None),
        }
        print(f"eigen: {result.eigenvalues_db.shape[0]} windows, "
              f"skipped {result.skipped}")

    _atomic_write(out_dir / "summary.json",
                  lambda p: Path(p).write_text(json.dumps(summary, indent=2,
                                                          sort_keys=True) + "\n"))
    return EXIT_OK


def cmd_validate(args, config) -> int:
    root = Path(args.dataset_path)
    if not root.exists():
        print(f"error: {root} does not exist", file=sys.stderr)
        return EXIT_USAGE
    try:
        manifest, reader = ds.load_dataset(root)
    except DatasetError as exc:
        pid = f" [{exc.position_id}]" if exc.position_id else ""
        print(f"FAIL{pid}: {exc}")
        return EXIT_DATA
    failures = 0
    for pid in reader.position_ids():
        try:
            reader.load(pid)
            print(f"PASS {pid}")
        except DatasetError as exc:
            print(f"FAIL {pid}: {exc}")
            failures += 1
    print(f"{len(reader) - failures}/{len(reader)} positions valid")
    return EXIT_OK if failures == 0 else EXIT_DATA


def cmd_schedule(args, config) -> int:
    source = _open_source(args, config)
    section = config.get("schedule", {})
    window_length = int(_setting(args.window_length, section, "window_length", 100))
    p = int(_setting(args.p, section, "p", scheduler.DEFAULT_DOMINANT_DIRECTIONS))
    group_size = int(_setting(args.group_size, section, "group_size", 2))
    num_positions = int(_setting(args.positions, section, "positions", 8))
    separation = (scheduler.correlation_separation if args.metric == "correlation"
                  else scheduler.chordal_separation)

    signatures = scheduler.build_signatures(
        source, window_length, p, seed=RngSeed(args.seed),
        num_positions=num_positions)
    if len(signatures) < group_size:
        print(f"error: only {len(signatures)} usable signatures", file=sys.stderr)
        return EXIT_DATA
    groups = scheduler.greedy_group(signatures, group_size, separation)

    out_dir = Path(args.out or "results")
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "p": p,
        "group_size": group_size,
        "distance_metric": args.metric,
        "groups": scheduler.groups_to_json(groups),
    }
    _atomic_write(out_dir / "schedule.json",
                  lambda path: Path(path).write_text(json.dumps(payload, indent=2) + "\n"))
    for g in groups:
        print(f"group {list(g.members)} min_chordal={g.min_pairwise_chordal:.4f}")
    return EXIT_OK


def cmd_report(args, config) -> int:
    from . import report
    out_dir = Path(args.out or "results")
    if not out_dir.is_dir():
        print(f"error: {out_dir} is not a directory", file=sys.stderr)
        return EXIT_USAGE
    written = report.render_report(out_dir)
    for path in written:
        print(f"wrote {path}")
    if not written:
        print("no recognized CSV outputs found")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_source_flags(sub):
    sub.add_argument("--dataset", help="dataset directory (container format)")
    sub.add_argument("--model", help="synthetic model: iid | kronecker | sparse")
    sub.add_argument("--antennas", type=int)
    sub.add_argument("--snapshots", type=int)
    sub.add_argument("--freqs", type=int)
    sub.add_argument("--rho", type=float)
    sub.add_argument("--noise-floor", dest="noise_floor", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmchar",
        description="Massive-MIMO channel characterization toolkit")
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads (0 = auto); results are thread-count invariant")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="write a synthetic dataset")
    p_synth.add_argument("--model")
    p_synth.add_argument("--antennas", type=int)
    p_synth.add_argument("--snapshots", type=int)
    p_synth.add_argument("--freqs", type=int)
    p_synth.add_argument("--positions", type=int)
    p_synth.add_argument("--rho", type=float)
    p_synth.add_argument("--noise-floor", dest="noise_floor", type=float)
    p_synth.add_argument("--array", choices=["ula", "ura"], default="ula")
    p_synth.add_argument("--rows", type=int)
    p_synth.add_argument("--carrier-hz", dest="carrier_hz", type=float,
                         default=869.525e6)
    p_synth.add_argument("--snapshot-interval", dest="snapshot_interval",
                         type=float, default=0.01)
    p_synth.set_defaults(func=cmd_synth)

    p_analyze = sub.add_parser("analyze", help="run experiments, write CSV/JSON")
    _add_source_flags(p_analyze)
    p_analyze.add_argument("--experiments",
                           help="comma list: hardening,correlation,condition,eigen")
    p_analyze.add_argument("--window-length", dest="window_length", type=int)
    p_analyze.add_argument("--antenna-counts", dest="antenna_counts")
    p_analyze.add_argument("--node-counts", dest="node_counts")
    p_analyze.add_argument("--trials", type=int)
    p_analyze.add_argument("--p", type=int)
    p_analyze.set_defaults(func=cmd_analyze)

    p_validate = sub.add_parser("validate", help="check a dataset directory")
    p_validate.add_argument("dataset_path")
    p_validate.set_defaults(func=cmd_validate)

    p_schedule = sub.add_parser("schedule", help="group nodes by eigenspace separation")
    _add_source_flags(p_schedule)
    p_schedule.add_argument("--window-length", dest="window_length", type=int)
    p_schedule.add_argument("--p", type=int)
    p_schedule.add_argument("--group-size", dest="group_size", type=int)
    p_schedule.add_argument("--positions", type=int)
    p_schedule.add_argument("--metric", choices=["chordal", "correlation"],
                            default="chordal")
    p_schedule.set_defaults(func=cmd_schedule)

    p_report = sub.add_parser("report", help="render figures from analyze outputs")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

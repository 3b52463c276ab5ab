"""Command-line driver: solve, sweep, generate, validate.

Grammar: ``binopt <solve|sweep|generate|validate> <task> [flags]`` with
tasks qubo / recovery / mimo / onebit.  Solve writes one JSON-lines
record per trial; sweep writes a per-trial CSV plus a median-aggregated
CSV.  Machine-readable outputs carry no wall-clock fields, so a rerun
with the same flags and seed is byte-identical; timings appear on the
stdout summary only.

Exit codes: 0 success, 2 usage error, 3 instance error, 4 solver
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import statistics
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .instances import (
    InstanceFormatError,
    MimoInstance,
    OneBitInstance,
    QuboInstance,
    RecoveryInstance,
    gen_mimo,
    gen_onebit,
    gen_qubo_synthetic,
    gen_recovery,
    load_instance,
    parse_beasley,
    save_instance,
    validate_instance,
    write_orlib,
)
from .metrics import accuracy, bit_error_rate, gap
from .penalty import is_binary
from .presets import initial_point, preset_for
from .solver import AppaConfig, LineSearchError, solve

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INSTANCE = 3
EXIT_SOLVER = 4

OUTPUT_DIR_ENV = "BINOPT_OUTPUT_DIR"

TASKS = ("qubo", "recovery", "mimo", "onebit")

CONFIG_FLAGS = (
    "eta", "alpha", "sigma", "lambda0", "pi", "theta", "k0",
    "epsilon", "max_iters", "max_backtracks",
)

SWEEP_AXES = {
    "recovery": ("m", "n", "s", "q", "nf"),
    "mimo": ("m", "n", "snr_db"),
    "onebit": ("m", "n", "snr_db"),
    "qubo": ("n", "case", "density"),
}

TRIAL_CSV_COLUMNS = (
    "schema", "task", "axis", "axis_value", "trial", "seed", "objective",
    "penalty", "iterations", "terminated_by", "binary",
    "stationarity_residual", "acc", "ber", "gap_percent",
)

MEDIAN_CSV_COLUMNS = (
    "schema", "task", "axis", "axis_value", "trials", "median_objective",
    "median_acc", "mean_acc", "median_ber", "mean_ber",
    "median_gap_percent", "mean_gap_percent",
)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _out_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "binopt_out"))


def _fmt(value) -> str:
    # repr gives the shortest round-trip float form; keeps CSV stable
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# instance construction
# ---------------------------------------------------------------------------


def _beasley_dir(args) -> Path:
    if getattr(args, "beasley_dir", None):
        return Path(args.beasley_dir)
    env = os.environ.get("BINOPT_BEASLEY_DIR")
    if env:
        return Path(env)
    return Path("data/beasley")


def _resolve_beasley(args) -> Path:
    base = _beasley_dir(args)
    for suffix in (".sparse", ".txt", ""):
        cand = base / f"{args.beasley}{suffix}"
        if cand.exists():
            return cand
    raise CliError(
        f"benchmark instance '{args.beasley}' not found under {base} "
        "(run scripts/fetch_beasley.py or set --beasley-dir/BINOPT_BEASLEY_DIR)",
        EXIT_INSTANCE,
    )


def _build_instance(task: str, args, seed: int):
    """One instance per trial seed; file-backed sources ignore the seed."""
    try:
        if getattr(args, "file", None):
            inst = load_instance(args.file)
            expected = {
                "qubo": QuboInstance, "recovery": RecoveryInstance,
                "mimo": MimoInstance, "onebit": OneBitInstance,
            }[task]
            if not isinstance(inst, expected):
                raise CliError(
                    f"{args.file} holds a {type(inst).__name__}, not a {task} instance",
                    EXIT_INSTANCE,
                )
            return inst
        if task == "qubo":
            if getattr(args, "beasley", None):
                return parse_beasley(_resolve_beasley(args))
            if getattr(args, "orlib", None):
                return parse_beasley(args.orlib)
            if args.n is None or args.case is None:
                raise CliError(
                    "qubo needs --n/--case, --beasley, --orlib or --file", EXIT_USAGE
                )
            return gen_qubo_synthetic(args.n, args.case, seed, density=args.density)
        if task == "recovery":
            missing = [f for f in ("m", "n", "s") if getattr(args, f) is None]
            if missing:
                raise CliError(f"recovery needs --{' --'.join(missing)}", EXIT_USAGE)
            return gen_recovery(args.m, args.n, args.s, args.q, args.nf, seed)
        if task == "mimo":
            if args.m is None or args.n is None:
                raise CliError("mimo needs --m and --n", EXIT_USAGE)
            return gen_mimo(args.m, args.n, args.snr_db, channel=args.channel,
                            r=args.corr_r, seed=seed)
        if task == "onebit":
            if args.m is None or args.n is None:
                raise CliError("onebit needs --m and --n", EXIT_USAGE)
            return gen_onebit(args.m, args.n, args.snr_db, seed)
    except (InstanceFormatError, ValueError) as err:
        raise CliError(str(err), EXIT_INSTANCE) from err
    raise CliError(f"unknown task {task}", EXIT_USAGE)


def _instance_meta(task: str, args, inst, seed: int) -> dict:
    if getattr(args, "file", None):
        return {"source": "file", "path": str(args.file)}
    if task == "qubo":
        if getattr(args, "beasley", None) or getattr(args, "orlib", None):
            return {"source": "benchmark", "name": inst.source.name,
                    "n": inst.n, "best_known": inst.best_known}
        return {"source": "synthetic", "n": inst.n, "case": args.case,
                "density": inst.source.density, "seed": seed}
    if task == "recovery":
        return {"m": args.m, "n": args.n, "s": args.s, "q": args.q,
                "nf": args.nf, "seed": seed}
    if task == "mimo":
        return {"m": args.m, "n": args.n, "snr_db": args.snr_db,
                "channel": args.channel, "seed": seed}
    return {"m": args.m, "n": args.n, "snr_db": args.snr_db, "seed": seed}


def _build_config(args, inst) -> AppaConfig:
    if args.preset == "none":
        cfg = AppaConfig()
    else:
        cfg = preset_for(inst, matrix_norm=args.matrix_norm)
    overrides = {}
    for name in CONFIG_FLAGS:
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.time_cap is not None:
        overrides["time_cap_secs"] = args.time_cap
    return replace(cfg, **overrides) if overrides else cfg


def _metrics_for(task: str, inst, report) -> dict:
    out = {"acc": None, "ber": None, "gap_percent": None}
    binary = is_binary(report.x_final)
    if task == "recovery":
        out["acc"] = accuracy(report.x_final, inst.x_star)
    elif task == "mimo":
        out["acc"] = accuracy(report.x_final, inst.x_star)
        if binary:
            out["ber"] = bit_error_rate(report.x_final, inst.x_star)
    elif task == "onebit":
        if binary:
            out["ber"] = bit_error_rate(report.x_final, inst.x_star)
    elif task == "qubo" and inst.best_known is not None and inst.best_known != 0.0:
        out["gap_percent"] = gap(report.objective_value, inst.best_known)
    return out


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def _run_trials(task: str, args):
    trials = []
    for trial in range(args.trials):
        seed = args.seed if args.shared_instance else args.seed + trial
        inst = _build_instance(task, args, seed)
        cfg = _build_config(args, inst)
        try:
            report = solve(inst.objective(), initial_point(inst), cfg)
        except LineSearchError as err:
            raise CliError(f"trial {trial}: {err}", EXIT_SOLVER) from err
        trials.append((trial, seed, inst, cfg, report, _metrics_for(task, inst, report)))
    # batch gap for synthetic quadratic batches without a reference value
    if task == "qubo" and trials and all(t[5]["gap_percent"] is None for t in trials):
        lowest = min(t[4].objective_value for t in trials)
        if lowest != 0.0:
            for t in trials:
                t[5]["gap_percent"] = gap(t[4].objective_value, lowest)
    return trials


def _trial_record(task: str, args, trial, seed, inst, cfg, report, metrics) -> dict:
    x = report.x_final
    result = {
        "objective": float(report.objective_value),
        "penalty": float(report.penalty_value),
        "iterations": report.iterations,
        "terminated_by": report.terminated_by.value,
        "stationarity_residual": float(report.stationarity_residual),
        "binary": is_binary(x),
        "lambda_final": float(report.lambda_trace[-1]) if report.lambda_trace else None,
        "tau_final": float(report.tau_trace[-1]) if report.tau_trace else None,
        "backtracks_total": int(sum(report.backtrack_counts)),
        "x_ones": int(np.count_nonzero(x == 1.0)),
        "x_sha256": hashlib.sha256(np.ascontiguousarray(x).tobytes()).hexdigest(),
    }
    record = {
        "schema": "binopt.trial.v1",
        "task": task,
        "trial": trial,
        "seed": seed,
        "instance": _instance_meta(task, args, inst, seed),
        "config": {
            "preset": args.preset,
            "eta": cfg.eta, "alpha": cfg.alpha, "sigma": cfg.sigma,
            "lambda0": cfg.lambda0, "pi": cfg.pi, "theta": cfg.theta,
            "k0": cfg.k0, "epsilon": cfg.epsilon,
            "max_iters": cfg.max_iters, "max_backtracks": cfg.max_backtracks,
        },
        "result": result,
        "metrics": metrics,
    }
    if not args.no_traces:
        record["traces"] = {
            "lambda": [float(v) for v in report.lambda_trace],
            "tau": [float(v) for v in report.tau_trace],
            "backtracks": list(report.backtrack_counts),
        }
    if args.emit_x:
        record["x"] = [float(v) for v in x]
    return record


def _summary_line(name: str, values) -> str:
    values = [v for v in values if v is not None]
    if not values:
        return f"  {name}: n/a"
    return (
        f"  {name}: median {statistics.median(values):.6g}  "
        f"mean {statistics.fmean(values):.6g}  best {min(values):.6g}"
    )


def cmd_solve(args) -> int:
    task = args.task
    trials = _run_trials(task, args)
    out_path = Path(args.output) if args.output else _out_dir() / f"{task}_solve.jsonl"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w") as fh:
        for trial, seed, inst, cfg, report, metrics in trials:
            record = _trial_record(task, args, trial, seed, inst, cfg, report, metrics)
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    objectives = [t[4].objective_value for t in trials]
    print(f"{task}: {len(trials)} trial(s) -> {out_path}")
    print(_summary_line("objective", objectives))
    for key in ("acc", "ber", "gap_percent"):
        values = [t[5][key] for t in trials]
        if any(v is not None for v in values):
            print(_summary_line(key, values))
    times = [t[4].wall_time_secs for t in trials]
    print(f"  wall time: median {statistics.median(times):.3f}s  total {sum(times):.3f}s")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _parse_axis_values(axis: str, raw: str):
    values = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        values.append(int(part) if axis in ("m", "n", "s", "case") else float(part))
    if not values:
        raise CliError("--values is empty", EXIT_USAGE)
    return values


def cmd_sweep(args) -> int:
    task = args.task
    axes = SWEEP_AXES[task]
    if args.axis not in axes:
        raise CliError(f"axis for {task} must be one of {axes}", EXIT_USAGE)
    values = _parse_axis_values(args.axis, args.values)

    out_base = Path(args.output) if args.output else _out_dir() / f"{task}_sweep_{args.axis}"
    out_base.parent.mkdir(parents=True, exist_ok=True)
    trial_path = out_base.with_suffix(".csv")
    median_path = Path(str(out_base) + "_median.csv")

    rows = []
    aggregates = []
    for value in values:
        setattr(args, args.axis, value)
        trials = _run_trials(task, args)
        per_metric = {"acc": [], "ber": [], "gap_percent": []}
        objectives = []
        for trial, seed, inst, cfg, report, metrics in trials:
            objectives.append(report.objective_value)
            for k in per_metric:
                per_metric[k].append(metrics[k])
            rows.append({
                "schema": "binopt.sweep.v1", "task": task, "axis": args.axis,
                "axis_value": value, "trial": trial, "seed": seed,
                "objective": report.objective_value,
                "penalty": report.penalty_value,
                "iterations": report.iterations,
                "terminated_by": report.terminated_by.value,
                "binary": is_binary(report.x_final),
                "stationarity_residual": report.stationarity_residual,
                "acc": metrics["acc"], "ber": metrics["ber"],
                "gap_percent": metrics["gap_percent"],
            })
        agg = {
            "schema": "binopt.sweep.v1", "task": task, "axis": args.axis,
            "axis_value": value, "trials": len(trials),
            "median_objective": statistics.median(objectives),
        }
        for k in ("acc", "ber", "gap_percent"):
            vals = [v for v in per_metric[k] if v is not None]
            agg[f"median_{k}"] = statistics.median(vals) if vals else None
            agg[f"mean_{k}"] = statistics.fmean(vals) if vals else None
        aggregates.append(agg)
        shown = {k: v for k, v in agg.items() if k.startswith("median") and v is not None}
        print(f"{args.axis}={value}: " + "  ".join(f"{k}={v:.6g}" for k, v in shown.items()))

    with open(trial_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in TRIAL_CSV_COLUMNS])
    with open(median_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MEDIAN_CSV_COLUMNS)
        for agg in aggregates:
            writer.writerow([_fmt(agg[c]) for c in MEDIAN_CSV_COLUMNS])
    print(f"wrote {trial_path} and {median_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# generate / validate
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    inst = _build_instance(args.task, args, args.seed)
    out_path = Path(args.output) if args.output else _out_dir() / f"{args.task}_{args.seed}.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "orlib":
        if not isinstance(inst, QuboInstance):
            raise CliError("orlib export applies to qubo instances only", EXIT_USAGE)
        write_orlib(inst, out_path)
    else:
        save_instance(inst, out_path)
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    failures = 0
    for path in args.paths:
        try:
            try:
                inst = load_instance(path)
            except InstanceFormatError:
                inst = parse_beasley(path)
            validate_instance(inst)
        except (InstanceFormatError, OSError) as err:
            print(f"{path}: FAIL ({err})")
            failures += 1
            continue
        print(f"{path}: ok ({type(inst).__name__})")
    if failures:
        raise CliError(f"{failures} file(s) failed validation", EXIT_INSTANCE)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_instance_flags(p: argparse.ArgumentParser, task: str):
    p.add_argument("--file", help="native JSON instance file")
    if task == "qubo":
        p.add_argument("--n", type=int)
        p.add_argument("--case", type=int, choices=(1, 2, 3, 4, 5))
        p.add_argument("--density", type=float, default=None)
        p.add_argument("--beasley", help="benchmark instance name, e.g. bqp100-3")
        p.add_argument("--beasley-dir", help="directory with benchmark files")
        p.add_argument("--orlib", help="sparse triplet file path")
    elif task == "recovery":
        p.add_argument("--m", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--s", type=int)
        p.add_argument("--q", type=float, default=2.0)
        p.add_argument("--nf", type=float, default=0.0)
    else:
        p.add_argument("--m", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--snr-db", type=float, default=10.0)
        if task == "mimo":
            p.add_argument("--channel", choices=("iid", "correlated"), default="iid")
            p.add_argument("--corr-r", type=float, default=0.2)


def _add_run_flags(p: argparse.ArgumentParser, require_seed: bool):
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, required=require_seed, default=None if require_seed else 0)
    p.add_argument("--output", help="output path (default under $BINOPT_OUTPUT_DIR)")
    p.add_argument("--preset", default=None,
                   help="hyperparameter preset: task name (default) or 'none'")
    p.add_argument("--matrix-norm", choices=("maxabs", "rowsum"), default=None,
                   help="inf-norm reading used by preset cap rules")
    p.add_argument("--shared-instance", action="store_true",
                   help="all trials solve the instance drawn from --seed")
    p.add_argument("--emit-x", action="store_true", help="include the final point")
    p.add_argument("--no-traces", action="store_true",
                   help="omit per-iteration traces from records")
    p.add_argument("--time-cap", type=float, default=None, help="per-solve seconds cap")
    for name in CONFIG_FLAGS:
        kind = int if name in ("k0", "max_iters", "max_backtracks") else float
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binopt",
        description="binary integer programming via a piecewise-cubic exact penalty",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for command, runner in (("solve", cmd_solve), ("sweep", cmd_sweep)):
        cp = sub.add_parser(command)
        tasks = cp.add_subparsers(dest="task", required=True)
        for task in TASKS:
            tp = tasks.add_parser(task)
            _add_instance_flags(tp, task)
            _add_run_flags(tp, require_seed=(command == "sweep"))
            if command == "sweep":
                tp.add_argument("--axis", required=True)
                tp.add_argument("--values", required=True,
                                help="comma-separated axis values")
            tp.set_defaults(func=runner)

    gp = sub.add_parser("generate")
    gtasks = gp.add_subparsers(dest="task", required=True)
    for task in TASKS:
        tp = gtasks.add_parser(task)
        _add_instance_flags(tp, task)
        tp.add_argument("--seed", type=int, default=0)
        tp.add_argument("--output", help="output path")
        tp.add_argument("--format", choices=("native", "orlib"), default="native")
        tp.set_defaults(func=cmd_generate)

    vp = sub.add_parser("validate")
    vp.add_argument("paths", nargs="+")
    vp.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "preset", None) is None and hasattr(args, "preset"):
        args.preset = args.task
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be at least 1")
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())

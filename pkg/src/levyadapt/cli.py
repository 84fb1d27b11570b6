"""Command-line entry point: ``levyadapt {simulate,estimate,adapt,bench}``.

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or input.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

from .adaptive import SelectionTrace, adaptive_curve
from .bench import RiskReport, irregular_experiment, run_experiment
from .errors import LevyAdaptError
from .estimator import estimate_curve
from .levy_sim import (
    Irregular,
    PowerDecay,
    read_increments_csv,
    sample_increments,
    write_increments_csv,
)
from .runconfig import ConfigError, RunConfig, load_config

log = logging.getLogger("levyadapt")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class InputError(ValueError):
    """Malformed data file; reported like a config error."""


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


# -----------------------------------------------------------------------------
# writers
# -----------------------------------------------------------------------------
def write_curve_csv(path, estimates) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x0", "h", "g_hat", "N_hat"])
        for e in estimates:
            w.writerow([_fmt(e.x0), _fmt(e.h), _fmt(e.value), _fmt(e.levy_value)])


def write_adaptive_csv(path, traces: list[SelectionTrace]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x0", "h_hat", "g_hat", "N_hat"])
        for t in traces:
            e = t.estimate
            w.writerow([_fmt(t.x0), _fmt(t.h_hat), _fmt(e.value), _fmt(e.levy_value)])


def write_trace_csv(path, traces: list[SelectionTrace]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x0", "h", "V", "A", "criterion", "chosen"])
        for t in traces:
            for x0, h, v, a, c, chosen in t.rows():
                w.writerow([_fmt(x0), _fmt(h), _fmt(v), _fmt(a), _fmt(c), int(chosen)])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_bench_outputs(out_dir: Path, report: RiskReport) -> dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / "report.json",
        "summary": out_dir / "summary.csv",
        "curves": out_dir / "curves.csv",
    }
    paths["report"].write_text(report.to_json() + "\n")
    row = report.summary_row()
    with open(paths["summary"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "n_delta", "mise_mean", "mise_se", "successes", "replications"])
        w.writerow([row["model"], _fmt(row["n_delta"]), _fmt(row["mise_mean"]),
                    _fmt(row["mise_se"]), report.successes, len(report.mise)])
    with open(paths["curves"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replication", "x0", "h_hat", "g_hat"])
        for rep, curve in enumerate(report.curves):
            if curve is None:
                continue
            for x0, h, g in zip(report.points, curve["h_hat"], curve["g_hat"]):
                w.writerow([rep, _fmt(x0), _fmt(h), _fmt(g)])
    return paths


# -----------------------------------------------------------------------------
# commands
# -----------------------------------------------------------------------------
def _out(cfg: RunConfig, args, default: str) -> Path:
    if args.out is not None:
        return Path(args.out)
    out = cfg.get("run", "out")
    return cfg.resolve(out) if out is not None else Path(default)


def cmd_simulate(cfg: RunConfig, args) -> int:
    model, scheme = cfg.model(), cfg.scheme()
    series = sample_increments(model, scheme, cfg.seed)
    path = _out(cfg, args, "increments.csv")
    write_increments_csv(series, path)
    log.info("wrote %d increments to %s", series.n, path)
    return EXIT_OK


def _load_data(cfg: RunConfig, args):
    if args.data is not None:
        path = Path(args.data)
    elif cfg.get("estimate", "data") is not None:
        path = cfg.resolve(cfg.get("estimate", "data"))
    else:
        raise ConfigError("[estimate] data", "no data file given (config key or --data)")
    if not path.exists():
        raise FileNotFoundError(f"data file not found: {path}")
    try:
        return read_increments_csv(path)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_estimate(cfg: RunConfig, args, force_adaptive: bool = False) -> int:
    data = _load_data(cfg, args)
    kernel = cfg.kernel()
    points = cfg.estimate_points()
    mode = "adaptive" if force_adaptive else cfg.get("estimate", "mode", "adaptive")
    fmt = cfg.get("run", "format", "csv")
    path = _out(cfg, args, f"curve.{fmt}")
    if mode == "fixed":
        h = cfg.get("estimate", "h")
        if h is None:
            raise ConfigError("[estimate] h", "required when mode = fixed")
        if not h > 0:
            raise ConfigError("[estimate] h", "bandwidth must be positive")
        ests = estimate_curve(data, kernel, h, points, method=cfg.get("estimate", "method", "auto"))
        if fmt == "json":
            write_json(path, [asdict(e) for e in ests])
        else:
            write_curve_csv(path, ests)
        log.info("wrote fixed-bandwidth curve to %s", path)
        return EXIT_OK

    config = cfg.adaptive()
    model = cfg.model() if cfg.has("model") else None
    traces = adaptive_curve(data, kernel, config, points, model=model)
    trace_path = path.with_name(path.stem + "_trace.csv")
    if fmt == "json":
        write_json(path, [
            {"x0": t.x0, "h_hat": t.h_hat, "g_hat": t.estimate.value, "N_hat": t.estimate.levy_value,
             "bandwidths": list(t.bandwidths), "V": list(t.V), "A": list(t.A)}
            for t in traces
        ])
    else:
        write_adaptive_csv(path, traces)
    write_trace_csv(trace_path, traces)
    log.info("wrote adaptive curve to %s and selection trace to %s", path, trace_path)
    return EXIT_OK


def cmd_bench(cfg: RunConfig, args) -> int:
    spec = cfg.experiment(replications=args.replications)
    threads = args.threads if args.threads is not None else cfg.get("run", "threads", os.cpu_count())
    out_dir = _out(cfg, args, "bench_out")
    if isinstance(spec.scheme, (Irregular, PowerDecay)):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report, _ = irregular_experiment(spec, threads=threads)
        for w in caught:
            log.warning("%s", w.message)
    else:
        report = run_experiment(spec, threads=threads)
    paths = write_bench_outputs(out_dir, report)
    print(f"{spec.model.name} n*Dbar={report.metadata['total_time']:.6g} "
          f"MISE={report.mean_mise:.6g} (s.e. {report.se_mise:.3g}, "
          f"{report.successes}/{spec.replications} replications)")
    log.info("wrote %s", ", ".join(str(p) for p in paths.values()))
    return EXIT_OK


# -----------------------------------------------------------------------------
# entry point
# -----------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levyadapt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--seed", type=int, help="override [run] seed")
        p.add_argument("--out", help="override [run] out")
        p.add_argument("--threads", type=int, help="worker threads (default: CPU count)")
        return p

    common(sub.add_parser("simulate", help="simulate increments and write them as CSV"))
    for name, help_ in (("estimate", "fixed or adaptive curve from a data file"),
                        ("adapt", "adaptive curve with selection trace")):
        p = common(sub.add_parser(name, help=help_))
        p.add_argument("--data", help="increment CSV (overrides [estimate] data)")
    p = common(sub.add_parser("bench", help="Monte Carlo MISE experiment"))
    p.add_argument("--replications", type=int, help="override [experiment] replications")
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "adapt": lambda cfg, args: cmd_estimate(cfg, args, force_adaptive=True),
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.raw.setdefault("run", {})["seed"] = args.seed
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LevyAdaptError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

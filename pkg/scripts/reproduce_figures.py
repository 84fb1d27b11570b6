#!/usr/bin/env python3
"""Run the figure-panel experiments in configs/ and print a MISE table.

    python scripts/reproduce_figures.py                 # all eight panels
    python scripts/reproduce_figures.py --only ex3_ndelta2500 --replications 3

Reports are written under results/<panel>/ (report.json, summary.csv, curves.csv).
"""
import argparse
import os
import time
from pathlib import Path

from levyadapt.cli import write_bench_outputs
from levyadapt.bench import run_experiment
from levyadapt.runconfig import load_config

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--configs", default=ROOT / "configs", type=Path)
    ap.add_argument("--only", nargs="*", help="panel names (config stems) to run")
    ap.add_argument("--replications", type=int)
    ap.add_argument("--threads", type=int, default=os.cpu_count())
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    args = ap.parse_args()

    paths = sorted(args.configs.glob("*.ini"))
    if args.only:
        paths = [p for p in paths if p.stem in set(args.only)]
    print(f"{'panel':<18}{'model':<16}{'n*Delta':>9}{'MISE':>12}{'s.e.':>11}{'secs':>8}")
    for path in paths:
        cfg = load_config(path)
        spec = cfg.experiment(replications=args.replications)
        t0 = time.perf_counter()
        report = run_experiment(spec, threads=args.threads)
        secs = time.perf_counter() - t0
        write_bench_outputs(args.out / path.stem, report)
        print(f"{path.stem:<18}{spec.model.name:<16}{report.metadata['total_time']:>9.0f}"
              f"{report.mean_mise:>12.5f}{report.se_mise:>11.2e}{secs:>8.1f}")


if __name__ == "__main__":
    main()

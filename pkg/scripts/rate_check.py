#!/usr/bin/env python3
"""Log-log MISE slope against n*Delta for Merton and Example 1.

Each n*Delta = T uses regular sampling with Delta = n^{-1/3}, so that the
discretisation bias vanishes faster than the estimation error.
"""
import argparse
import os

from levyadapt import Example1, Merton, high_frequency_scheme, rate_regression

TOTALS = (500.0, 1000.0, 2000.0, 4000.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replications", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=os.cpu_count())
    args = ap.parse_args()

    schemes = [high_frequency_scheme(T) for T in TOTALS]
    for model in (Merton(2.0, 0.3), Example1()):
        fit = rate_regression(model, schemes, replications=args.replications,
                              master_seed=args.seed, threads=args.threads)
        cells = "  ".join(f"T={T:.0f}: {m:.2e}" for T, m in zip(fit.total_times, fit.mean_mise))
        print(f"{model.name:<10} slope={fit.slope:+.3f}  {cells}")


if __name__ == "__main__":
    main()

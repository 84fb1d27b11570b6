"""Monte Carlo risk harness for the adaptive estimator.

Every replication draws from its own stream ``SeedSequence(master_seed,
spawn_key=(index,))`` and results are gathered in replication order, so a
report does not depend on how many worker threads produced it.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .adaptive import (
    AdaptiveConfig,
    adaptive_curve,
    estimate_tables,
    resolve_C0,
    traces_from_tables,
    variance_term,
)
from .errors import LevyAdaptError, PreconditionError
from .kernel import KernelSpec, build_kernel
from .levy_sim import (
    Example1,
    GammaProcess,
    Merton,
    ModelSpec,
    PowerDecay,
    Regular,
    SamplingScheme,
    VarianceGamma,
    sample_increments,
)

log = logging.getLogger(__name__)

DEFAULT_INTERVALS = {
    "example1": (0.04, 2.0),
    "gamma": (0.1, 5.0),
    "merton": (-1.0, 1.0),
    "variance_gamma": (-0.6, 0.6),
}


def default_interval(model: ModelSpec) -> tuple[float, float]:
    return DEFAULT_INTERVALS[model.name]


@dataclass(frozen=True)
class ExperimentSpec:
    model: ModelSpec
    scheme: SamplingScheme
    config: AdaptiveConfig = field(default_factory=AdaptiveConfig)
    kernel: KernelSpec | None = None
    eval_interval: tuple[float, float] | None = None
    n_points: int = 50
    replications: int = 10
    master_seed: int = 0
    levy_hole: float = 0.04

    def __post_init__(self):
        if self.eval_interval is None:
            object.__setattr__(self, "eval_interval", default_interval(self.model))
        a, b = self.eval_interval
        if not a < b:
            raise ValueError("eval_interval must satisfy a < b")
        if self.n_points < 1 or self.replications < 1:
            raise ValueError("n_points and replications must be >= 1")
        if self.kernel is None:
            object.__setattr__(self, "kernel", build_kernel())

    @property
    def points(self) -> np.ndarray:
        a, b = self.eval_interval
        return np.linspace(a, b, self.n_points)


@dataclass
class RiskReport:
    mise: list                      # per replication; None where the replication failed
    mean_mise: float
    se_mise: float
    point_mse: list
    mean_h_hat: list
    points: list
    failures: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    curves: list = field(default_factory=list)   # per replication: (h_hat, g_hat)

    @property
    def successes(self) -> int:
        return sum(m is not None for m in self.mise)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def summary_row(self) -> dict:
        return {
            "model": self.metadata.get("model"),
            "n_delta": self.metadata.get("total_time"),
            "mise_mean": self.mean_mise,
            "mise_se": self.se_mise,
        }


def mise(estimates, truth, a: float, b: float) -> float:
    """Riemann-sum integrated squared error: ``(b - a) / n_points * sum err^2``."""
    err = np.asarray(estimates) - np.asarray(truth)
    return float((b - a) / err.size * np.sum(err * err))


def standard_error(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return math.nan
    return float(np.std(v, ddof=1) / math.sqrt(v.size))


def _map(fn, items, threads: int | None):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _one_replication(spec: ExperimentSpec, rep: int):
    data = sample_increments(spec.model, spec.scheme, spec.master_seed, (rep,))
    traces = adaptive_curve(data, spec.kernel, spec.config, spec.points, model=spec.model)
    g_hat = np.array([t.estimate.value for t in traces])
    h_hat = np.array([t.h_hat for t in traces])
    return data, g_hat, h_hat


def run_experiment(spec: ExperimentSpec, threads: int | None = None) -> RiskReport:
    """Adaptive curves on ``n_points`` uniform points for every replication, with MISE."""
    a, b = spec.eval_interval
    pts = spec.points
    truth = np.asarray(spec.model.g(pts), dtype=float)

    def work(rep):
        try:
            return rep, _one_replication(spec, rep), None
        except LevyAdaptError as exc:
            return rep, None, f"{type(exc).__name__}: {exc}"

    results = _map(work, range(spec.replications), threads)
    mises, curves, failures = [], [], {}
    sq_err, hsum, ok = np.zeros(pts.size), np.zeros(pts.size), 0
    total_time = None
    for rep, res, err in results:
        if res is None:
            mises.append(None)
            curves.append(None)
            failures[str(rep)] = err
            log.warning("replication %d failed: %s", rep, err)
            continue
        data, g_hat, h_hat = res
        total_time = data.total_time
        mises.append(mise(g_hat, truth, a, b))
        curves.append({"h_hat": h_hat.tolist(), "g_hat": g_hat.tolist()})
        sq_err += (g_hat - truth) ** 2
        hsum += h_hat
        ok += 1
    good = [m for m in mises if m is not None]
    if not good:
        raise LevyAdaptError(f"all {spec.replications} replications failed: {failures}")
    return RiskReport(
        mise=mises,
        mean_mise=float(np.mean(good)),
        se_mise=standard_error(good),
        point_mse=(sq_err / ok).tolist(),
        mean_h_hat=(hsum / ok).tolist(),
        points=pts.tolist(),
        failures=failures,
        metadata=_metadata(spec, total_time),
        curves=curves,
    )


def _metadata(spec: ExperimentSpec, total_time) -> dict:
    cfg = spec.config
    return {
        "model": spec.model.name,
        "model_params": {k: v for k, v in asdict(spec.model).items()},
        "scheme": type(spec.scheme).__name__,
        "n": int(spec.scheme.intervals().size),
        "total_time": total_time,
        "c": cfg.c,
        "c0_mode": cfg.c0_mode,
        "grid_rule": cfg.grid_rule,
        "engine": cfg.engine,
        "kernel": {"base": spec.kernel.base.family, "order": spec.kernel.order, "rule": spec.kernel.rule},
        "eval_interval": list(spec.eval_interval),
        "replications": spec.replications,
        "master_seed": spec.master_seed,
    }


# -----------------------------------------------------------------------------
# rate regression
# -----------------------------------------------------------------------------
@dataclass
class RateFit:
    slope: float
    intercept: float
    total_times: list
    mean_mise: list
    reports: list = field(default_factory=list, repr=False)


def rate_regression(
    model: ModelSpec,
    schemes: Sequence[SamplingScheme],
    config: AdaptiveConfig = AdaptiveConfig(),
    kernel: KernelSpec | None = None,
    replications: int = 10,
    master_seed: int = 0,
    eval_interval: tuple[float, float] | None = None,
    threads: int | None = None,
) -> RateFit:
    """OLS fit of ``log(mean MISE)`` on ``log(n Dbar)`` across sampling schemes."""
    totals = [float(np.sum(s.intervals())) for s in schemes]
    if len(set(totals)) < 3:
        raise PreconditionError("rate regression needs at least 3 distinct n * Dbar values")
    reports = []
    for s in schemes:
        spec = ExperimentSpec(
            model, s, config, kernel, eval_interval,
            replications=replications, master_seed=master_seed,
        )
        reports.append(run_experiment(spec, threads=threads))
    y = np.log([r.mean_mise for r in reports])
    x = np.log(totals)
    slope, intercept = np.polyfit(x, y, 1)
    return RateFit(float(slope), float(intercept), totals, [r.mean_mise for r in reports], reports)


# -----------------------------------------------------------------------------
# oracle gap
# -----------------------------------------------------------------------------
def oracle_gap(
    model: ModelSpec,
    scheme: SamplingScheme,
    config: AdaptiveConfig = AdaptiveConfig(),
    points=(1.0,),
    kernel: KernelSpec | None = None,
    replications: int = 50,
    master_seed: int = 0,
    threads: int | None = None,
) -> list[dict]:
    """Pointwise MSE of the adaptive estimator versus the best fixed bandwidth.

    Both use the same replications. ``ratio = adaptive / (best_fixed + V(h_best))``
    where ``V`` is averaged over replications (it depends on C0 only).
    """
    kernel = build_kernel() if kernel is None else kernel
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    truth = np.asarray(model.g(pts), dtype=float)

    def work(rep):
        data = sample_increments(model, scheme, master_seed, (rep,))
        C0 = resolve_C0(config, data, kernel, model)
        grid = config.grid_for(data)
        hs = grid.as_array()
        V = np.atleast_1d(variance_term(C0, data.n, data.mean_interval, hs))
        single, pair = estimate_tables(data, kernel, hs, pts, config.engine, config.fft)
        traces = traces_from_tables(grid, V, single, pair, pts)
        ada = np.array([t.estimate.value for t in traces])
        return hs, single, ada, V

    results = _map(work, range(replications), threads)
    hs = results[0][0]
    fixed_sq = np.mean([(r[1] - truth[None, :]) ** 2 for r in results], axis=0)  # [h, p]
    ada_sq = np.mean([(r[2] - truth) ** 2 for r in results], axis=0)
    V_mean = np.mean([r[3] for r in results], axis=0)
    out = []
    for p, x0 in enumerate(pts):
        j = int(np.argmin(fixed_sq[:, p]))
        best = float(fixed_sq[j, p])
        out.append({
            "x0": float(x0),
            "adaptive_risk": float(ada_sq[p]),
            "best_fixed_risk": best,
            "best_h": float(hs[j]),
            "V_best": float(V_mean[j]),
            "ratio": float(ada_sq[p] / (best + V_mean[j])),
            "per_h_risk": fixed_sq[:, p].tolist(),
            "bandwidths": hs.tolist(),
        })
    return out


# -----------------------------------------------------------------------------
# irregular sampling
# -----------------------------------------------------------------------------
@dataclass
class ConditionDiagnostics:
    mean_interval: float
    mean_sq_interval: float
    condition_value: float          # (mean(D^2))^2 / mean(D)
    inverse_n: float
    ratio: float                    # condition_value * n
    satisfied: bool                 # condition_value <= 1 (oracle-inequality hypothesis)


def sampling_condition(scheme: SamplingScheme) -> ConditionDiagnostics:
    d = scheme.intervals()
    n = d.size
    m1 = float(np.mean(d))
    m2 = float(np.mean(d * d))
    cond = m2 * m2 / m1
    return ConditionDiagnostics(m1, m2, cond, 1.0 / n, cond * n, cond <= 1.0)


def irregular_experiment(spec: ExperimentSpec, threads: int | None = None):
    """:func:`run_experiment` plus diagnostics of ``(mean D^2)^2 / mean D`` against ``1/n``."""
    if isinstance(spec.scheme, PowerDecay) and not (1 / 3 - 1e-12 <= spec.scheme.alpha <= 1):
        raise PreconditionError("alpha_decay must lie in [1/3, 1]")
    diag = sampling_condition(spec.scheme)
    if not diag.satisfied:
        warnings.warn(
            f"sampling condition violated: (mean D^2)^2 / mean D = {diag.condition_value:.3g} > 1",
            RuntimeWarning,
            stacklevel=2,
        )
    report = run_experiment(spec, threads=threads)
    report.metadata["condition"] = asdict(diag)
    return report, diag


def figure_spec(example: int, total_time: float = 2500.0, delta: float = 0.05, **kw) -> ExperimentSpec:
    """Experiment for one figure panel: example 1-4 at ``n Delta = total_time``."""
    models = {1: Example1(), 2: GammaProcess(1.0, 1.0), 3: Merton(2.0, 0.3), 4: VarianceGamma()}
    n = int(round(total_time / delta))
    return ExperimentSpec(models[example], Regular(delta, n), **kw)


def high_frequency_scheme(total_time: float, exponent: float = 1.0 / 3.0) -> Regular:
    """Regular sampling with ``Delta = n^{-exponent}`` and ``n Delta = total_time``.

    With ``exponent = 1/3`` the discretisation bias stays below the variance
    as ``total_time`` grows, so MISE decay reflects the estimator alone.
    """
    if not total_time > 0 or not 0 < exponent < 1:
        raise ValueError("need total_time > 0 and exponent in (0, 1)")
    n = max(1, int(round(total_time ** (1.0 / (1.0 - exponent)))))
    return Regular(total_time / n, n)

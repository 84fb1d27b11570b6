"""Pure-jump Levy models, sampling schemes and increment series.

Four finite-variation models are supported, each described through its
function ``g(x) = x N(x)`` where ``N`` is the Levy density:

* :class:`Example1` -- compound Poisson with ``g(x) = sqrt(x / 2) / 2`` on (0, 2].
* :class:`GammaProcess` -- ``g(x) = gamma * exp(-alpha x)`` for x > 0.
* :class:`Merton` -- compound Poisson with N(0, delta^2) jumps at rate ``lam``.
* :class:`VarianceGamma` -- Brownian motion with drift run on a gamma clock.

Random streams come from :class:`numpy.random.SeedSequence`, so a replication
keyed by ``(master_seed, index)`` is reproducible regardless of scheduling.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def make_rng(seed, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally on an independent child stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=stream)))


# -----------------------------------------------------------------------------
# models
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Example1:
    """Compound Poisson process whose Levy density is ``N(x) = x^{-1/2} / (2 sqrt 2)`` on (0, 2].

    The total jump intensity is ``int N = 1`` and jumps have CDF ``sqrt(x / 2)``,
    sampled by inversion as ``2 U^2``.
    """

    name = "example1"

    @property
    def intensity(self) -> float:
        return 1.0

    def g(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x <= 2)
        return np.where(inside, 0.5 * np.sqrt(np.where(inside, x, 0.0) / 2.0), 0.0)

    def sample_jumps(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return 2.0 * rng.random(size) ** 2

    def sample(self, intervals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return _compound_poisson(intervals, self.intensity, self.sample_jumps, rng)

    def g_integral(self) -> float:
        return 2.0 / 3.0

    def g_l1(self) -> float:
        return 2.0 / 3.0

    def fourier_norms(self):
        return None


@dataclass(frozen=True)
class GammaProcess:
    gamma: float = 1.0
    alpha: float = 1.0

    name = "gamma"

    def __post_init__(self):
        if not (self.gamma > 0 and self.alpha > 0):
            raise ValueError("GammaProcess parameters gamma and alpha must be positive")

    def g(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, self.gamma * np.exp(-self.alpha * np.maximum(x, 0.0)), 0.0)

    def sample(self, intervals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return rng.gamma(self.gamma * intervals, 1.0 / self.alpha)

    def g_integral(self) -> float:
        return self.gamma / self.alpha

    def g_l1(self) -> float:
        return self.gamma / self.alpha

    def fourier_norms(self):
        # g*(u) = gamma / (alpha - iu)
        l2_sq = self.gamma**2 * math.pi / self.alpha
        deriv_l1 = self.gamma * math.pi / self.alpha
        return FourierNorms(g_fourier_L2_sq=l2_sq, g_fourier_deriv_L1=deriv_l1)


@dataclass(frozen=True)
class Merton:
    """Compound Poisson with rate ``lam`` and N(0, delta^2) jumps.

    ``lam = 0`` is accepted (no jumps at all) as a limiting case.
    """

    lam: float = 2.0
    delta: float = 0.3

    name = "merton"

    def __post_init__(self):
        if self.lam < 0 or not self.delta > 0:
            raise ValueError("Merton needs lam >= 0 and delta > 0")

    def g(self, x):
        x = np.asarray(x, dtype=float)
        d = self.delta
        return self.lam * x * np.exp(-0.5 * (x / d) ** 2) / (d * _SQRT_2PI)

    def sample_jumps(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return self.delta * rng.standard_normal(size)

    def sample(self, intervals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return _compound_poisson(intervals, self.lam, self.sample_jumps, rng)

    def g_integral(self) -> float:
        return 0.0

    def g_l1(self) -> float:
        return self.lam * self.delta * math.sqrt(2.0 / math.pi)

    def fourier_norms(self):
        # g*(u) = i lam delta^2 u exp(-delta^2 u^2 / 2)
        lam, d = self.lam, self.delta
        l2_sq = lam**2 * d * math.sqrt(math.pi) / 2.0
        deriv_l1 = 4.0 * lam * d * math.exp(-0.5)
        return FourierNorms(g_fourier_L2_sq=l2_sq, g_fourier_deriv_L1=deriv_l1)


@dataclass(frozen=True)
class VarianceGamma:
    """``L_t = theta G_t + sigma W(G_t)`` with ``G`` a gamma clock of unit mean rate.

    The clock increment over a span ``t`` is Gamma(shape t / nu, scale nu).
    """

    theta: float = -0.1436
    sigma: float = 0.1213
    nu: float = 0.1686

    name = "variance_gamma"

    def __post_init__(self):
        if not (self.sigma > 0 and self.nu > 0):
            raise ValueError("VarianceGamma needs sigma > 0 and nu > 0")

    @property
    def _rates(self) -> tuple[float, float]:
        """Exponential decay rates of g on the positive and negative half-lines."""
        s2 = self.sigma**2
        m = math.sqrt(2.0 / self.nu + self.theta**2 / s2) / self.sigma
        return m - self.theta / s2, m + self.theta / s2

    def g(self, x):
        x = np.asarray(x, dtype=float)
        s2 = self.sigma**2
        m = math.sqrt(2.0 / self.nu + self.theta**2 / s2) / self.sigma
        ax = np.abs(x)
        return np.sign(x) / self.nu * np.exp(self.theta * x / s2 - m * ax)

    def sample(self, intervals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        clock = rng.gamma(intervals / self.nu, self.nu)
        return self.theta * clock + self.sigma * np.sqrt(clock) * rng.standard_normal(intervals.size)

    def g_integral(self) -> float:
        a, b = self._rates
        return (1.0 / a - 1.0 / b) / self.nu

    def g_l1(self) -> float:
        a, b = self._rates
        return (1.0 / a + 1.0 / b) / self.nu

    def fourier_norms(self):
        return None


ModelSpec = Union[Example1, GammaProcess, Merton, VarianceGamma]
MODELS = {"example1": Example1, "gamma": GammaProcess, "merton": Merton, "variance_gamma": VarianceGamma}


@dataclass(frozen=True)
class FourierNorms:
    g_fourier_L2_sq: float
    g_fourier_deriv_L1: float


def _compound_poisson(intervals, rate, draw_jumps, rng) -> np.ndarray:
    counts = rng.poisson(rate * intervals)
    total = int(counts.sum())
    if total == 0:
        return np.zeros(intervals.size)
    jumps = draw_jumps(total, rng)
    owner = np.repeat(np.arange(intervals.size), counts)
    return np.bincount(owner, weights=jumps, minlength=intervals.size)


def true_g(model: ModelSpec, x):
    out = model.g(x)
    return float(out) if np.ndim(out) == 0 else out


def levy_density(model: ModelSpec, x):
    """``N(x) = g(x) / x`` (nan at the origin)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x != 0, model.g(x) / np.where(x != 0, x, 1.0), np.nan)
    return float(out) if out.ndim == 0 else out


def analytic_fourier_norms(model: ModelSpec) -> FourierNorms | None:
    """Closed-form ``||g*||_2^2`` and ``||(g*)'||_1`` when available (gamma, Merton)."""
    return model.fourier_norms()


def g_quadrature(model: ModelSpec, power: int = 0, absolute: bool = False) -> float:
    """``int x^power g(x) dx`` (or of |x^power g|) by adaptive quadrature."""

    def f(x):
        v = x**power * float(model.g(x))
        return abs(v) if absolute else v

    if isinstance(model, Example1):
        pieces = [(0.0, 2.0)]
    elif isinstance(model, GammaProcess):
        pieces = [(0.0, math.inf)]
    else:
        pieces = [(-math.inf, 0.0), (0.0, math.inf)]
    total = 0.0
    for a, b in pieces:
        total += integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-11, limit=500)[0]
    return total


# -----------------------------------------------------------------------------
# sampling schemes
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Regular:
    delta: float
    n: int

    def __post_init__(self):
        if not self.delta > 0 or self.n < 1:
            raise ValueError("Regular scheme needs delta > 0 and n >= 1")

    def intervals(self) -> np.ndarray:
        return np.full(self.n, float(self.delta))


@dataclass(frozen=True)
class Irregular:
    deltas: tuple[float, ...]

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        if d.ndim != 1 or d.size < 1 or np.any(~(d > 0)):
            raise ValueError("Irregular scheme needs at least one strictly positive interval")
        object.__setattr__(self, "deltas", tuple(float(v) for v in d))

    def intervals(self) -> np.ndarray:
        return np.asarray(self.deltas, dtype=float)


@dataclass(frozen=True)
class PowerDecay:
    """Intervals ``Delta_k = C k^{-alpha}`` for k = 1..n with alpha in [1/3, 1]."""

    C: float
    alpha: float
    n: int

    def __post_init__(self):
        if not self.C > 0 or self.n < 1:
            raise ValueError("PowerDecay needs C > 0 and n >= 1")
        if not (1.0 / 3.0 - 1e-12 <= self.alpha <= 1.0):
            raise ValueError(f"PowerDecay alpha must lie in [1/3, 1], got {self.alpha}")

    def intervals(self) -> np.ndarray:
        k = np.arange(1, self.n + 1, dtype=float)
        return self.C * k ** (-self.alpha)


SamplingScheme = Union[Regular, Irregular, PowerDecay]


# -----------------------------------------------------------------------------
# increment series
# -----------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class IncrementSeries:
    values: np.ndarray
    intervals: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.values, dtype=float)
        d = np.asarray(self.intervals, dtype=float)
        if z.ndim != 1 or z.shape != d.shape:
            raise ValueError("values and intervals must be 1-d arrays of equal length")
        if z.size == 0:
            raise ValueError("increment series is empty")
        if np.any(~(d > 0)):
            raise ValueError("sampling intervals must be strictly positive")
        if not np.all(np.isfinite(z)):
            raise ValueError("increments must be finite")
        z.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "values", z)
        object.__setattr__(self, "intervals", d)

    @classmethod
    def regular(cls, values, delta: float) -> "IncrementSeries":
        values = np.asarray(values, dtype=float)
        return cls(values, np.full(values.size, float(delta)))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def mean_interval(self) -> float:
        """``Delta-bar``, the mean sampling interval."""
        d = self.intervals
        return float(d[0]) if np.all(d == d[0]) else float(np.mean(d))

    @property
    def mean_sq_interval(self) -> float:
        d = self.intervals
        return float(d[0]) ** 2 if np.all(d == d[0]) else float(np.mean(d * d))

    @property
    def total_time(self) -> float:
        """``n * Delta-bar``."""
        return self.n * self.mean_interval

    @property
    def is_regular(self) -> bool:
        return bool(np.all(self.intervals == self.intervals[0]))

    def concat(self, other: "IncrementSeries") -> "IncrementSeries":
        return IncrementSeries(
            np.concatenate([self.values, other.values]),
            np.concatenate([self.intervals, other.intervals]),
        )


def sample_increments(model: ModelSpec, scheme: SamplingScheme, seed, stream: tuple[int, ...] = ()) -> IncrementSeries:
    """Draw independent increments, the k-th distributed as ``L_{Delta_k}``."""
    intervals = scheme.intervals()
    rng = make_rng(seed, *stream)
    return IncrementSeries(model.sample(intervals, rng), intervals)


def write_increments_csv(series: IncrementSeries, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta", "z"])
        for d, z in zip(series.intervals, series.values):
            w.writerow([repr(float(d)), repr(float(z))])


def read_increments_csv(path: str | Path) -> IncrementSeries:
    deltas, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        if [h.strip().lower() for h in header] != ["delta", "z"]:
            raise ValueError(f"{path}: header must be 'delta,z', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                d, z = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise ValueError(f"{path}: line {lineno}: expected two numeric columns") from None
            deltas.append(d)
            values.append(z)
    if not values:
        raise ValueError(f"{path}: no increments")
    return IncrementSeries(np.array(values), np.array(deltas))

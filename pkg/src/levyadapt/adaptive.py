"""Local Goldenshluger-Lepski bandwidth selection.

For a point x0 and a finite bandwidth grid H:

    V(h)     = C0 * log(n Dbar) / (n h Dbar)
    A(h, x0) = max_{h' in H} [ |g_{h,h'}(x0) - g_{h'}(x0)|^2 - V(h') ]_+
    h_hat    = argmin_{h in H} A(h, x0) + V(h)      (ties -> smallest h)

where g_{h,h'} smooths with ``K_h' * K_h``. The constant
``C0 = c / (2 pi) * ||K||_2^2 * (||(g*)'||_1 + ||g*||_2^2)`` takes its Fourier
norms from the model (oracle), from the data (empirical), or is given directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy.integrate import trapezoid

from .errors import DegenerateC0, InsufficientObservationTime, PreconditionError
from .estimator import (
    BinnedGrid,
    FFTSettings,
    PointEstimate,
    data_weights,
    kernel_reach,
    weighted_kernel_sum,
    weighted_profile_sum,
)
from .kernel import KernelSpec, convolve_kernels, eval_scaled
from .levy_sim import FourierNorms, IncrementSeries, ModelSpec

GRID_RULES = ("theory", "simulation", "explicit")
C0_MODES = ("oracle", "empirical", "manual")
ENGINES = ("auto", "direct", "fft")

# "auto" engine switches to FFT above this many kernel evaluations
DIRECT_WORK_LIMIT = 5_000_000


@dataclass(frozen=True)
class BandwidthGrid:
    values: tuple[float, ...]
    rule: str
    M: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("bandwidth grid must be non-empty")
        if np.any(v <= 0) or np.any(np.diff(v) <= 0):
            raise ValueError("bandwidth grid must be positive and strictly increasing")
        if self.rule != "explicit" and v[-1] > 1.0:
            raise ValueError("theory/simulation grids must lie in (0, 1]")
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @classmethod
    def theory(cls, M: int) -> "BandwidthGrid":
        """``{j / M : 1 <= j <= M}``."""
        _check_M(M)
        return cls(tuple(j / M for j in range(1, M + 1)), "theory", M)

    @classmethod
    def simulation(cls, M: int) -> "BandwidthGrid":
        """``{j / (2M) : 1 <= j <= M}``."""
        _check_M(M)
        return cls(tuple(j / (2 * M) for j in range(1, M + 1)), "simulation", M)

    @classmethod
    def explicit(cls, values) -> "BandwidthGrid":
        return cls(tuple(values), "explicit", len(values))

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)


def _check_M(M):
    if not isinstance(M, (int, np.integer)) or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")


def _floor_cube_root(x: float) -> int:
    """Largest integer m with m^3 <= x, immune to the rounding of x ** (1/3)."""
    m = int(math.floor(x ** (1.0 / 3.0)))
    while (m + 1) ** 3 <= x:
        m += 1
    while m > 0 and m**3 > x:
        m -= 1
    return m


def simulation_M(total_time: float) -> int:
    """``floor(2 (n Dbar)^{1/3})``, at least 1."""
    return max(1, _floor_cube_root(8.0 * total_time))


def theory_M(total_time: float) -> int:
    """``floor((n Dbar)^{1/3})``, at least 1."""
    return max(1, _floor_cube_root(total_time))


@dataclass(frozen=True)
class AdaptiveConfig:
    """Settings of the bandwidth selection.

    ``c = 0.1`` is the calibrated simulation value. The oracle inequality is only
    guaranteed for ``c >= 16 max(1, ||K||_inf)`` (32 with empirical norms); see
    :meth:`theory_c`.
    """

    grid_rule: str = "simulation"
    M: int | None = None
    bandwidths: tuple[float, ...] | None = None
    c: float = 0.1
    c0_mode: str = "empirical"
    c0_value: float | None = None
    quadrature_step: float | None = None
    engine: str = "auto"
    fft: FFTSettings = field(default_factory=lambda: FFTSettings(points_per_bandwidth=64.0))

    def __post_init__(self):
        if self.grid_rule not in GRID_RULES:
            raise ValueError(f"grid_rule must be one of {GRID_RULES}")
        if self.grid_rule == "explicit" and not self.bandwidths:
            raise ValueError("explicit grid_rule needs bandwidths")
        if not self.c > 0:
            raise ValueError("calibration constant c must be positive")
        if self.c0_mode not in C0_MODES:
            raise ValueError(f"c0_mode must be one of {C0_MODES}")
        if self.c0_mode == "manual" and not (self.c0_value is not None and self.c0_value > 0):
            raise ValueError("manual c0_mode needs a positive c0_value")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if self.quadrature_step is not None and not self.quadrature_step > 0:
            raise ValueError("quadrature_step must be positive")

    def grid_for(self, data: IncrementSeries) -> BandwidthGrid:
        if self.grid_rule == "explicit":
            return BandwidthGrid.explicit(self.bandwidths)
        if self.grid_rule == "theory":
            return BandwidthGrid.theory(self.M or theory_M(data.total_time))
        return BandwidthGrid.simulation(self.M or simulation_M(data.total_time))

    @staticmethod
    def theory_c(kernel: KernelSpec, empirical: bool = False) -> float:
        return (32.0 if empirical else 16.0) * max(1.0, kernel.norms.Linf)


@dataclass(frozen=True)
class SelectionTrace:
    x0: float
    bandwidths: tuple[float, ...]
    V: tuple[float, ...]
    A: tuple[float, ...]
    criterion: tuple[float, ...]
    h_hat: float
    estimate: PointEstimate

    @property
    def index(self) -> int:
        return self.bandwidths.index(self.h_hat)

    def rows(self):
        """Audit rows ``(x0, h, V, A, criterion, chosen)``."""
        for h, v, a, c in zip(self.bandwidths, self.V, self.A, self.criterion):
            yield (self.x0, h, v, a, c, h == self.h_hat)


# -----------------------------------------------------------------------------
# variance term and C0
# -----------------------------------------------------------------------------
def variance_term(C0: float, n: int, mean_delta: float, h):
    """``V(h) = C0 log(n Dbar) / (n h Dbar)``, vectorised over ``h``."""
    T = n * mean_delta
    if not T > 1:
        raise InsufficientObservationTime(
            f"n * mean interval = {T!r} must exceed 1 so that log(n Delta) > 0"
        )
    h = np.asarray(h, dtype=float)
    out = C0 * math.log(T) / (T * h)
    return float(out) if out.ndim == 0 else out


def empirical_fourier_norms(
    data: IncrementSeries, step: float | None = None, method: str = "auto"
) -> FourierNorms:
    """Data-driven ``||(g*)'||_1`` and ``||g*||_2^2``.

    Both use the cut-off transform ``1_[-1,1](u h1)`` with ``h1 = (n Dbar)^{-1/3}``:

        ||(g*)'||_1 ~ int_{|u| <= 1/h1} |1/(n Dbar) sum Z_k^2 e^{iuZ_k}| du
        ||g*||_2^2  ~ int_{|u| <= 1/h1} |1/(n Dbar) sum Z_k e^{iuZ_k}|^2 du

    integrated by the trapezoid rule with default step ``1 / (4 max|Z_k|)``.
    ``method='fft'`` evaluates the empirical transforms from linearly binned data
    (bin width 0.01 h1) and is used by ``auto`` for large samples.
    """
    z = data.values
    zmax = float(np.max(np.abs(z)))
    if zmax == 0.0:
        raise DegenerateC0("all increments are zero; empirical Fourier norms vanish")
    T = data.total_time
    U = T ** (1.0 / 3.0)
    step = 1.0 / (4.0 * zmax) if step is None else step
    J = int(math.ceil(U / step))
    if method == "auto":
        method = "direct" if data.n * (J + 1) <= DIRECT_WORK_LIMIT else "fft"

    if method == "direct":
        u = np.linspace(0.0, U, J + 1)
        w = np.stack([z / T, z * z / T])
        first = np.empty(J + 1, dtype=complex)
        second = np.empty(J + 1, dtype=complex)
        chunk = max(1, 2_000_000 // data.n)
        for i in range(0, J + 1, chunk):
            e = np.exp(1j * np.outer(z, u[i : i + chunk]))
            first[i : i + chunk], second[i : i + chunk] = w @ e
    elif method == "fft":
        span = float(np.max(z) - np.min(z))
        # the DFT period 2 pi / du must hold every bin
        target = 0.01 / U
        J = max(J, int(math.ceil(U * (span + 4 * target) / (2 * math.pi))) + 1)
        du = U / J
        L = sfft.next_fast_len(int(math.ceil(2 * math.pi / (du * target))), real=True)
        bin_w = 2 * math.pi / (du * L)
        lo = float(np.min(z))
        pos = (z - lo) / bin_w
        idx = np.floor(pos).astype(np.int64)
        frac = pos - idx
        transforms = []
        for wk in (z / T, z * z / T):
            b = np.bincount(idx, weights=wk * (1 - frac), minlength=L)
            b += np.bincount(idx + 1, weights=wk * frac, minlength=L)
            transforms.append(np.conj(sfft.rfft(b[:L]))[: J + 1])
        u = du * np.arange(J + 1)
        # |.| is all we need, so the phase exp(i u lo) is dropped
        first, second = transforms
    else:
        raise ValueError(f"unknown method {method!r}")

    deriv_l1 = 2.0 * trapezoid(np.abs(second), u)
    l2_sq = 2.0 * trapezoid(np.abs(first) ** 2, u)
    return FourierNorms(g_fourier_L2_sq=float(l2_sq), g_fourier_deriv_L1=float(deriv_l1))


def compute_C0(
    mode: str,
    data: IncrementSeries | None,
    kernel: KernelSpec,
    c: float = 0.1,
    model: ModelSpec | None = None,
    value: float | None = None,
    quadrature_step: float | None = None,
) -> float:
    """``C0 = c / (2 pi) ||K||_2^2 (||(g*)'||_1 + ||g*||_2^2)`` or a manual value."""
    if mode == "manual":
        if value is None or not value > 0:
            raise PreconditionError("manual C0 needs a positive value")
        return float(value)
    if mode == "oracle":
        norms = model.fourier_norms() if model is not None else None
        if norms is None:
            raise PreconditionError("oracle C0 needs a model with closed-form Fourier norms")
    elif mode == "empirical":
        if data is None:
            raise PreconditionError("empirical C0 needs data")
        norms = empirical_fourier_norms(data, step=quadrature_step)
    else:
        raise ValueError(f"unknown C0 mode {mode!r}")
    C0 = c / (2 * math.pi) * kernel.norms.L2_sq * (norms.g_fourier_deriv_L1 + norms.g_fourier_L2_sq)
    if not C0 > 0:
        raise DegenerateC0("C0 evaluates to zero; bandwidth selection cannot proceed")
    return C0


def resolve_C0(config: AdaptiveConfig, data: IncrementSeries, kernel: KernelSpec, model=None) -> float:
    return compute_C0(
        config.c0_mode, data, kernel, c=config.c, model=model,
        value=config.c0_value, quadrature_step=config.quadrature_step,
    )


# -----------------------------------------------------------------------------
# estimate tables and the selection rule
# -----------------------------------------------------------------------------
def estimate_tables(
    data: IncrementSeries,
    kernel: KernelSpec,
    hs,
    points,
    engine: str = "auto",
    fft: FFTSettings = FFTSettings(points_per_bandwidth=64.0),
):
    """Single and pair estimates for every bandwidth (pair) at every point.

    Returns ``single[i, p] = g_{h_i}(x_p)`` and the symmetric
    ``pair[i, j, p] = g_{h_i, h_j}(x_p)``.
    """
    hs = np.asarray(hs, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    H, P = hs.size, points.size
    single = np.empty((H, P))
    pair = np.empty((H, H, P))
    if engine == "auto":
        work = data.n * P * H * (H + 3) / 2
        engine = "direct" if work <= DIRECT_WORK_LIMIT else "fft"
    w = data_weights(data)

    if engine == "direct":
        for i, h in enumerate(hs):
            single[i] = weighted_kernel_sum(data.values, w, kernel, h, points)
        for i in range(H):
            for j in range(i, H):
                prof = convolve_kernels(kernel, hs[i], hs[j])
                pair[i, j] = pair[j, i] = weighted_profile_sum(prof, data.values, w, points)
        return single, pair
    if engine != "fft":
        raise ValueError(f"unknown engine {engine!r}")

    reach = math.sqrt(2.0) * hs[-1] * kernel_reach(kernel)
    grid = BinnedGrid(data.values, w, points, hs[0] * kernel.min_scale, reach, fft)
    dfts = [grid.profile_dft(lambda t, h=h: eval_scaled(kernel, h, t)) for h in hs]
    for i in range(H):
        single[i] = grid.apply(dfts[i])
    gaussian = kernel.base.family == "gaussian"
    for i in range(H):
        for j in range(i, H):
            if gaussian:
                # discrete convolution of the sampled kernels; spectrally accurate
                d = grid.delta * dfts[i] * dfts[j]
            else:
                d = grid.profile_dft(convolve_kernels(kernel, hs[i], hs[j]))
            pair[i, j] = pair[j, i] = grid.apply(d)
    return single, pair


def _select_from_tables(hs, V, single, pair):
    """A and argmin over the grid for every point column."""
    diff = pair - single[None, :, :]          # [i, j, p] = g_{h_i,h_j} - g_{h_j}
    A = np.max(np.maximum(diff * diff - V[None, :, None], 0.0), axis=1)
    crit = A + V[:, None]
    idx = np.argmin(crit, axis=0)              # first minimum -> smallest h
    return A, crit, idx


def bias_proxy_A(
    data: IncrementSeries,
    kernel: KernelSpec,
    grid: BandwidthGrid,
    x0: float,
    h: float,
    V,
) -> float:
    """``A(h, x0)`` for one bandwidth; ``V`` lists V(h') over the grid."""
    w = data_weights(data)
    best = 0.0
    for hp, vp in zip(grid.values, np.asarray(V, dtype=float)):
        g1 = weighted_kernel_sum(data.values, w, kernel, hp, [x0])[0]
        g2 = weighted_profile_sum(convolve_kernels(kernel, h, hp), data.values, w, [x0])[0]
        best = max(best, (g2 - g1) ** 2 - vp)
    return best


def traces_from_tables(grid: BandwidthGrid, V, single, pair, points) -> list[SelectionTrace]:
    """Run the selection rule on precomputed estimate tables."""
    V = np.atleast_1d(np.asarray(V, dtype=float))
    A, crit, idx = _select_from_tables(grid.as_array(), V, single, pair)
    traces = []
    for p, x0 in enumerate(np.atleast_1d(points)):
        i = int(idx[p])
        traces.append(
            SelectionTrace(
                x0=float(x0),
                bandwidths=grid.values,
                V=tuple(V.tolist()),
                A=tuple(A[:, p].tolist()),
                criterion=tuple(crit[:, p].tolist()),
                h_hat=grid.values[i],
                estimate=PointEstimate.make(x0, grid.values[i], single[i, p]),
            )
        )
    return traces


def adaptive_curve(
    data: IncrementSeries,
    kernel: KernelSpec,
    config: AdaptiveConfig,
    points,
    model: ModelSpec | None = None,
    C0: float | None = None,
) -> list[SelectionTrace]:
    """Selected bandwidth and estimate at every point.

    The single- and pair-bandwidth estimates are computed once for all points
    and shared by every A(h, x0) evaluation.
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    if points.size == 0:
        return []
    grid = config.grid_for(data)
    if C0 is None:
        C0 = resolve_C0(config, data, kernel, model)
    V = variance_term(C0, data.n, data.mean_interval, grid.as_array())
    single, pair = estimate_tables(data, kernel, grid.as_array(), points, config.engine, config.fft)
    return traces_from_tables(grid, V, single, pair, points)


def select_bandwidth(
    data: IncrementSeries,
    kernel: KernelSpec,
    config: AdaptiveConfig,
    x0: float,
    model: ModelSpec | None = None,
    C0: float | None = None,
) -> SelectionTrace:
    return adaptive_curve(data, kernel, config, [x0], model=model, C0=C0)[0]

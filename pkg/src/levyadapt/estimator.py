"""Kernel estimators of ``g(x) = x N(x)`` from increments.

The basic estimator at bandwidth ``h`` is

    g_h(x) = 1 / (n * Dbar) * sum_k Z_k * K_h(x - Z_k)

where ``Dbar`` is the mean sampling interval (equal to Delta under regular
sampling). Two evaluation paths exist: a direct O(n * points) sum and an
FFT path that linearly bins the weighted increments on a fine uniform grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import InvalidBandwidth
from .kernel import KernelSpec, convolve_kernels, eval_scaled, kernel_fourier
from .levy_sim import IncrementSeries

# direct path is used by "auto" while n * len(points) stays below this
DIRECT_WORK_LIMIT = 2_000_000
_CHUNK = 4_000_000


@dataclass(frozen=True)
class PointEstimate:
    x0: float
    h: float
    value: float
    levy_value: float | None

    @classmethod
    def make(cls, x0: float, h: float, value: float) -> "PointEstimate":
        # N(x0) = g(x0) / x0 is undefined at the origin
        levy = value / x0 if x0 != 0 else None
        return cls(float(x0), float(h), float(value), levy)


@dataclass(frozen=True)
class FFTSettings:
    """Resolution of the binned path.

    The bin width is the smallest kernel component scale divided by
    ``points_per_bandwidth``; the grid always has at least ``min_bins`` nodes
    and extends ``pad_widths`` widest-component scales beyond the data.
    """

    min_bins: int = 4096
    points_per_bandwidth: float = 1024.0
    pad_widths: float = 5.0
    max_bins: int = 1 << 24


def data_weights(data: IncrementSeries) -> np.ndarray:
    """Per-observation weights ``Z_k / (n * Dbar)``."""
    return data.values / (data.n * data.mean_interval)


def _check_h(*hs):
    for h in hs:
        if not h > 0:
            raise InvalidBandwidth(f"bandwidth must be positive, got {h!r}")


def weighted_profile_sum(profile, positions, weights, points) -> np.ndarray:
    """``sum_k weights_k * profile(points_j - positions_k)`` for every point.

    Rows of the (points x n) difference matrix are processed in chunks; each
    row reduction uses numpy's fixed pairwise summation.
    """
    positions = np.asarray(positions, dtype=float)
    weights = np.asarray(weights, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    out = np.empty(points.size)
    step = max(1, _CHUNK // max(positions.size, 1))
    for i in range(0, points.size, step):
        d = points[i : i + step, None] - positions[None, :]
        out[i : i + step] = np.sum(profile(d) * weights[None, :], axis=1)
    return out


def weighted_kernel_sum(positions, weights, kernel: KernelSpec, h: float, points) -> np.ndarray:
    """``sum_k weights_k K_h(x - positions_k)``; positions and weights decoupled."""
    _check_h(h)
    return weighted_profile_sum(lambda d: eval_scaled(kernel, h, d), positions, weights, points)


def estimate_point(data: IncrementSeries, kernel: KernelSpec, h: float, x0: float) -> PointEstimate:
    value = weighted_kernel_sum(data.values, data_weights(data), kernel, h, [x0])[0]
    return PointEstimate.make(x0, h, value)


def estimate_pair(
    data: IncrementSeries, kernel: KernelSpec, h: float, h2: float, x0: float
) -> float:
    """Doubly smoothed estimate ``(K_h2 * g_h)(x0)``."""
    _check_h(h, h2)
    profile = convolve_kernels(kernel, h, h2)
    return float(weighted_profile_sum(profile, data.values, data_weights(data), [x0])[0])


def estimate_fourier(data: IncrementSeries, kernel: KernelSpec, h: float, u):
    """``1 / (n Dbar) * sum_k Z_k K*(u h) exp(i u Z_k)`` at frequency (or array) ``u``."""
    _check_h(h)
    u = np.asarray(u, dtype=float)
    flat = np.atleast_1d(u)
    w = data_weights(data)
    emp = np.empty(flat.size, dtype=complex)
    step = max(1, _CHUNK // data.n)
    for i in range(0, flat.size, step):
        emp[i : i + step] = np.exp(1j * np.outer(flat[i : i + step], data.values)) @ w
    out = emp * kernel_fourier(kernel, flat * h)
    return complex(out[0]) if u.ndim == 0 else out.reshape(u.shape)


# -----------------------------------------------------------------------------
# binned FFT path
# -----------------------------------------------------------------------------
def _uniform_step(points: np.ndarray) -> float | None:
    if points.size < 2:
        return None
    d = np.diff(points)
    if d[0] <= 0:
        return None
    if np.max(np.abs(d - d[0])) <= 1e-9 * d[0]:
        return float((points[-1] - points[0]) / (points.size - 1))
    return None


class BinnedGrid:
    """Weighted increments linearly binned on a uniform grid, ready for FFT smoothing.

    When the evaluation points are uniformly spaced the grid is aligned so that
    every point is a node; otherwise grid values are read by 4-point Lagrange
    interpolation.
    """

    def __init__(
        self,
        positions,
        weights,
        points,
        min_scale: float,
        reach: float,
        settings: FFTSettings = FFTSettings(),
    ):
        positions = np.asarray(positions, dtype=float)
        weights = np.asarray(weights, dtype=float)
        self.points = np.atleast_1d(np.asarray(points, dtype=float))
        target = min_scale / settings.points_per_bandwidth
        pad = settings.pad_widths * reach
        span_lo = min(positions.min(), self.points.min()) - pad
        span_hi = max(positions.max(), self.points.max()) + pad

        step = _uniform_step(self.points)
        if step is not None:
            delta = step / math.ceil(step / target)
        else:
            delta = target
        # refine until the grid has at least min_bins nodes
        while (span_hi - span_lo) / delta + 1 < settings.min_bins:
            delta /= 2.0
        anchor = self.points[0]
        lo = anchor - math.ceil((anchor - span_lo) / delta) * delta
        n_nodes = int(math.ceil((span_hi - lo) / delta)) + 2
        if n_nodes > settings.max_bins:
            raise ValueError(
                f"binned grid would need {n_nodes} nodes (> max_bins={settings.max_bins}); "
                "use the direct method or lower points_per_bandwidth"
            )
        self.lo, self.delta, self.n_nodes = lo, delta, n_nodes
        self.aligned = step is not None or self.points.size == 1

        pos = (positions - lo) / delta
        idx = np.floor(pos).astype(np.int64)
        frac = pos - idx
        binned = np.bincount(idx, weights=weights * (1.0 - frac), minlength=n_nodes)
        binned += np.bincount(idx + 1, weights=weights * frac, minlength=n_nodes)
        self.binned = binned[:n_nodes]
        self.fft_len = sfft.next_fast_len(2 * n_nodes - 1, real=True)
        self._wdft = sfft.rfft(self.binned, self.fft_len)

        m = np.arange(self.fft_len)
        self._offsets = np.where(m < self.fft_len // 2 + 1, m, m - self.fft_len) * delta
        if self.aligned:
            self._point_idx = np.rint((self.points - lo) / delta).astype(np.int64)
        else:
            # 4-point Lagrange stencil around each point
            t = (self.points - lo) / delta
            first = np.floor(t).astype(np.int64) - 1
            self._stencil = first[:, None] + np.arange(4)[None, :]
            r = t - first
            weights_l = np.ones((t.size, 4))
            for a in range(4):
                for b in range(4):
                    if a != b:
                        weights_l[:, a] *= (r - b) / (a - b)
            self._lagrange = weights_l

    def profile_dft(self, profile) -> np.ndarray:
        """DFT of ``profile`` sampled at the grid's signed offsets."""
        return sfft.rfft(profile(self._offsets))

    def apply(self, dft: np.ndarray) -> np.ndarray:
        """Values at the evaluation points of ``binned (*) profile``."""
        grid_vals = sfft.irfft(self._wdft * dft, self.fft_len)[: self.n_nodes]
        if self.aligned:
            return grid_vals[self._point_idx]
        return np.sum(grid_vals[self._stencil] * self._lagrange, axis=1)

    def smooth(self, profile) -> np.ndarray:
        return self.apply(self.profile_dft(profile))


def kernel_reach(kernel: KernelSpec) -> float:
    """Distance (per unit bandwidth) beyond which the kernel is negligible."""
    if kernel.base.family == "tabulated":
        lo, hi = kernel.support()
        return max(abs(lo), abs(hi))
    return kernel.max_scale


def estimate_curve(
    data: IncrementSeries,
    kernel: KernelSpec,
    h: float,
    points,
    method: str = "auto",
    fft: FFTSettings = FFTSettings(),
) -> list[PointEstimate]:
    """``g_h`` at every point, by direct summation or through the binned FFT path."""
    _check_h(h)
    points = np.asarray(points, dtype=float).ravel()
    if points.size == 0:
        return []
    if method == "auto":
        method = "direct" if data.n * points.size <= DIRECT_WORK_LIMIT else "fft"
    if method == "direct":
        vals = weighted_kernel_sum(data.values, data_weights(data), kernel, h, points)
    elif method == "fft":
        grid = BinnedGrid(
            data.values, data_weights(data), points,
            min_scale=h * kernel.min_scale, reach=h * kernel_reach(kernel), settings=fft,
        )
        vals = grid.smooth(lambda t: eval_scaled(kernel, h, t))
    else:
        raise ValueError(f"unknown method {method!r}")
    return [PointEstimate.make(x, h, v) for x, v in zip(points, vals)]

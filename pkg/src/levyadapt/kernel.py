"""Higher-order smoothing kernels built as signed mixtures of a base density.

A kernel of order ``l`` is assembled from a base density ``u`` as

    K(t) = sum_k w_k * (1 / s_k) * u(t / s_k),   w_k = binom(l, k) * (-1)**(k + 1)

for k = 1..l. Two scale rules are available:

``literal``
    s_k = k. This is the textbook binomial formula. With a gaussian base it does
    *not* cancel the second moment (int t^2 K = -2 for l = 2); it is kept as a
    diagnostic and for bases (cauchy) where it coincides with the other rule.
``convolution_power``
    s_k is the scale of the k-fold self-convolution of ``u`` (sqrt(k) for
    gaussian, k for cauchy). Then K* = 1 - (1 - u*)**l, so moments 1..2l-1
    vanish for a gaussian base.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate, optimize, signal
from scipy.interpolate import CubicSpline
from scipy.special import comb

from .errors import InvalidBandwidth, UnsupportedCombination

FAMILIES = ("gaussian", "cauchy", "tabulated")
RULES = ("literal", "convolution_power")

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# quadrature settings used for every cached norm; changing them changes the cache
QUAD_EPSABS = 1e-14
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 400
LINF_GRID_HALFWIDTH = 10.0
LINF_GRID_STEP = 1e-3


def _as_array(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class BaseDensity:
    """The base density ``u`` a kernel is built from.

    For ``tabulated`` the density is the linear interpolant of ``(nodes, values)``,
    zero outside the table, renormalised so that it integrates to one exactly.
    """

    family: str = "gaussian"
    scale: float = 1.0
    nodes: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    source: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown base family {self.family!r}; expected one of {FAMILIES}")
        if not self.scale > 0:
            raise ValueError("base scale must be positive")
        if self.family == "tabulated":
            x = _as_array(self.nodes)
            y = _as_array(self.values)
            if x.ndim != 1 or x.size < 2 or x.shape != y.shape:
                raise ValueError("tabulated base needs two equal-length columns with >= 2 rows")
            if np.any(np.diff(x) <= 0):
                raise ValueError("tabulated abscissae must be strictly increasing")
            if np.any(y < 0) or not np.all(np.isfinite(y)):
                raise ValueError("tabulated density values must be finite and nonnegative")
            mass = float(np.trapezoid(y, x))
            if not mass > 0:
                raise ValueError("tabulated density has zero mass")
            object.__setattr__(self, "nodes", tuple(float(v) for v in x))
            object.__setattr__(self, "values", tuple(float(v) / mass for v in y))

    # -- evaluation ------------------------------------------------------
    def pdf(self, x):
        x = _as_array(x) / self.scale
        if self.family == "gaussian":
            out = np.exp(-0.5 * x * x) / _SQRT_2PI
        elif self.family == "cauchy":
            out = 1.0 / (math.pi * (1.0 + x * x))
        else:
            out = np.interp(x, self.nodes, self.values, left=0.0, right=0.0)
        return out / self.scale

    def fourier(self, xi):
        """Characteristic function ``int exp(i xi x) u(x) dx``."""
        xi = _as_array(xi) * self.scale
        if self.family == "gaussian":
            return np.exp(-0.5 * xi * xi).astype(complex)
        if self.family == "cauchy":
            return np.exp(-np.abs(xi)).astype(complex)
        return _piecewise_linear_fourier(np.asarray(self.nodes), np.asarray(self.values), xi)

    def convolution_power_scale(self, k: int) -> float:
        """Scale factor of the k-fold self-convolution relative to ``u``."""
        if self.family == "gaussian":
            return math.sqrt(k)
        if self.family == "cauchy":
            return float(k)
        raise UnsupportedCombination(
            "tabulated base has no convolution closure; use rule='literal'"
        )

    def breakpoints(self) -> np.ndarray:
        if self.family == "tabulated":
            return np.asarray(self.nodes) * self.scale
        return np.array([0.0])

    def support(self) -> tuple[float, float]:
        if self.family == "tabulated":
            return self.nodes[0] * self.scale, self.nodes[-1] * self.scale
        return -math.inf, math.inf


def _piecewise_linear_fourier(x: np.ndarray, y: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Exact transform of the piecewise-linear interpolant through (x, y).

    Large |xi|: second-difference formula f* = -sum_j d_j exp(i xi x_j) / xi**2,
    where d_j are the slope jumps. Small |xi|: 8-point Gauss-Legendre per segment,
    which avoids the cancellation of the closed form.
    """
    xi = np.atleast_1d(xi)
    out = np.empty(xi.shape, dtype=complex)
    slopes = np.diff(y) / np.diff(x)
    jumps = np.diff(np.concatenate([[0.0], slopes, [0.0]]))
    width = float(np.max(np.diff(x)))
    small = np.abs(xi) * width < 1.0
    if np.any(~small):
        xs = xi[~small]
        out[~small] = -np.exp(1j * np.outer(xs, x)) @ jumps / xs**2
    if np.any(small):
        t, w = np.polynomial.legendre.leggauss(8)
        a, b = x[:-1], x[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        pts = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        vals = np.interp(pts, x, y)
        wts = (half[:, None] * w[None, :]).ravel() * vals
        out[small] = np.exp(1j * np.outer(xi[small], pts)) @ wts
    return out


def read_tabulated_csv(path: str | Path, scale: float = 1.0) -> BaseDensity:
    """Load a tabulated base density from a two-column CSV (abscissa, density).

    A non-numeric first row is treated as a header.
    """
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if i == 0:
                    continue
                raise ValueError(f"{path}: line {i + 1}: expected two numeric columns") from None
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two rows")
    x, y = zip(*rows)
    return BaseDensity("tabulated", scale=scale, nodes=x, values=y, source=str(path))


@dataclass(frozen=True)
class KernelNorms:
    L1: float
    L2: float
    Linf: float

    @property
    def L2_sq(self) -> float:
        return self.L2 * self.L2


@dataclass(frozen=True)
class KernelSpec:
    base: BaseDensity
    order: int
    rule: str
    terms: tuple[tuple[float, float], ...]
    norms: KernelNorms = field(compare=False)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.terms])

    @property
    def scales(self) -> np.ndarray:
        return np.array([s for _, s in self.terms])

    def __call__(self, x):
        return eval_kernel(self, x)

    @property
    def min_scale(self) -> float:
        """Smallest effective scale of any mixture component."""
        return float(np.min(self.scales)) * self.base.scale * self._unit_width()

    @property
    def max_scale(self) -> float:
        return float(np.max(self.scales)) * self.base.scale * self._unit_width()

    def _unit_width(self) -> float:
        if self.base.family == "tabulated":
            # 4-point Gauss-Legendre per segment is exact for x^2 times a linear piece
            x, y = np.asarray(self.base.nodes), np.asarray(self.base.values)
            t, w = np.polynomial.legendre.leggauss(4)
            mid, half = 0.5 * (x[1:] + x[:-1]), 0.5 * np.diff(x)
            pts = (mid[:, None] + half[:, None] * t).ravel()
            wts = (half[:, None] * w).ravel() * np.interp(pts, x, y)
            mean = wts @ pts
            return float(np.sqrt(wts @ (pts - mean) ** 2))
        return 1.0

    def support(self) -> tuple[float, float]:
        lo, hi = self.base.support()
        if not np.isfinite(lo):
            return lo, hi
        ends = [lo * s for s in self.scales] + [hi * s for s in self.scales]
        return min(ends), max(ends)


def _terms(base: BaseDensity, l: int, rule: str) -> tuple[tuple[float, float], ...]:
    terms = []
    for k in range(1, l + 1):
        w = float(comb(l, k, exact=True)) * (-1.0) ** (k + 1)
        s = float(k) if rule == "literal" else base.convolution_power_scale(k)
        terms.append((w, s))
    return tuple(terms)


def build_kernel(
    base: BaseDensity | None = None, l: int = 2, rule: str = "convolution_power"
) -> KernelSpec:
    """Build an order-``l`` kernel from ``base`` and compute its cached norms."""
    base = BaseDensity() if base is None else base
    if not isinstance(l, (int, np.integer)) or l < 1:
        raise ValueError("kernel order l must be a positive integer")
    if rule not in RULES:
        raise ValueError(f"unknown scaling rule {rule!r}; expected one of {RULES}")
    terms = _terms(base, int(l), rule)
    spec = KernelSpec(base, int(l), rule, terms, KernelNorms(math.nan, math.nan, math.nan))
    object.__setattr__(spec, "norms", kernel_norms(spec))
    return spec


def eval_kernel(k: KernelSpec, x):
    x = _as_array(x)
    out = np.zeros_like(x)
    for w, s in k.terms:
        out = out + w * k.base.pdf(x / s) / s
    return out if out.ndim else float(out)


def eval_scaled(k: KernelSpec, h: float, x):
    """``K_h(x) = K(x / h) / h``."""
    if not h > 0:
        raise InvalidBandwidth(f"bandwidth must be positive, got {h!r}")
    return eval_kernel(k, _as_array(x) / h) / h


def kernel_fourier(k: KernelSpec, xi):
    xi = _as_array(xi)
    out = np.zeros(xi.shape, dtype=complex)
    for w, s in k.terms:
        out = out + w * k.base.fourier(s * xi)
    return out if out.ndim else complex(out)


# -- quadrature ----------------------------------------------------------------
def _breakpoints(k: KernelSpec) -> np.ndarray:
    pts = [k.base.breakpoints() * s for _, s in k.terms]
    return np.unique(np.concatenate(pts))


def _integrate(k: KernelSpec, f: Callable[[float], float], extra=()) -> float:
    """Integrate ``f`` over the real line, splitting at kernel breakpoints."""
    lo, hi = k.support()
    pts = np.unique(np.concatenate([_breakpoints(k), np.asarray(extra, dtype=float)]))
    pts = pts[(pts > lo) & (pts < hi)]
    edges = [lo, *pts.tolist(), hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if a == b:
            continue
        val, _ = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)
        total += val
    return total


def _sign_changes(k: KernelSpec) -> np.ndarray:
    R = LINF_GRID_HALFWIDTH * k.max_scale
    t = np.linspace(-R, R, 40001)
    v = eval_kernel(k, t)
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    roots = []
    for i in idx:
        roots.append(optimize.brentq(lambda s: eval_kernel(k, s), t[i], t[i + 1], xtol=1e-15))
    return np.asarray(roots)


def kernel_moment(k: KernelSpec, j: int) -> float:
    """``int t**j K(t) dt`` by adaptive quadrature."""
    return _integrate(k, lambda t: t**j * eval_kernel(k, t))


def kernel_norms(k: KernelSpec) -> KernelNorms:
    """L1, L2 and sup norms of ``K``.

    L1 and L2 use adaptive Gauss-Kronrod quadrature split at sign changes; the sup
    norm is a dense-grid search (step 1e-3 in units of the widest component on
    [-10, 10]) refined by bounded scalar minimisation.
    """
    roots = _sign_changes(k)
    l1 = _integrate(k, lambda t: abs(eval_kernel(k, t)), extra=roots)
    l2_sq = _integrate(k, lambda t: eval_kernel(k, t) ** 2, extra=roots)

    R = LINF_GRID_HALFWIDTH * k.max_scale
    step = LINF_GRID_STEP * k.max_scale
    t = np.arange(-R, R + 0.5 * step, step)
    if k.base.family == "tabulated":
        t = np.union1d(t, np.concatenate([np.asarray(k.base.nodes) * k.base.scale * s for s in k.scales]))
    a = np.abs(eval_kernel(k, t))
    i = int(np.argmax(a))
    best = float(a[i])
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda s: -abs(eval_kernel(k, s)), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, float(-res.fun))
    return KernelNorms(L1=l1, L2=math.sqrt(l2_sq), Linf=best)


# -- convolution of two scaled kernels ------------------------------------------
class MixtureProfile:
    """Signed mixture of scaled copies of a stable base family (gaussian or cauchy)."""

    def __init__(self, family: str, weights, scales):
        self.family = family
        self.weights = np.asarray(weights, dtype=float)
        self.scales = np.asarray(scales, dtype=float)

    def __call__(self, x):
        x = _as_array(x)
        out = np.zeros_like(x)
        for w, s in zip(self.weights, self.scales):
            z = x / s
            if self.family == "gaussian":
                out = out + w * np.exp(-0.5 * z * z) / (_SQRT_2PI * s)
            else:
                out = out + w / (math.pi * s * (1.0 + z * z))
        return out if out.ndim else float(out)


class GridProfile:
    """Cubic-spline interpolant of a convolution computed on a uniform grid."""

    def __init__(self, grid: np.ndarray, values: np.ndarray):
        self.lo, self.hi = float(grid[0]), float(grid[-1])
        self._spline = CubicSpline(grid, values, extrapolate=False)

    def __call__(self, x):
        x = _as_array(x)
        out = np.nan_to_num(self._spline(x), nan=0.0)
        return out if out.ndim else float(out)


def convolve_kernels(
    k: KernelSpec,
    h: float,
    h2: float,
    method: str = "auto",
    points_per_scale: int = 200,
    tail: float = 12.0,
):
    """Return the profile ``x -> (K_h2 * K_h)(x)``.

    ``method='auto'`` is analytic for gaussian and cauchy bases (both are closed
    under convolution: gaussian scales add in quadrature, cauchy scales add
    linearly) and numerical otherwise. The numerical path samples both scaled
    kernels on a common grid of ``points_per_scale`` nodes per smallest component
    scale, convolves with an FFT and interpolates with a cubic spline.
    """
    if not (h > 0 and h2 > 0):
        raise InvalidBandwidth(f"bandwidths must be positive, got {h!r}, {h2!r}")
    if method not in ("auto", "analytic", "numerical"):
        raise ValueError(f"unknown convolution method {method!r}")
    family = k.base.family
    if method == "analytic" and family == "tabulated":
        raise UnsupportedCombination("tabulated kernels have no analytic convolution")
    if method != "numerical" and family != "tabulated":
        w, s = k.weights, k.scales * k.base.scale
        a, b = h * s, h2 * s
        if family == "gaussian":
            sc = np.sqrt(a[:, None] ** 2 + b[None, :] ** 2)
        else:
            sc = a[:, None] + b[None, :]
        # symmetrise so that (h, h2) and (h2, h) give bitwise-identical profiles
        ww = np.outer(w, w)
        order = np.lexsort((ww.ravel(), sc.ravel()))
        return MixtureProfile(family, ww.ravel()[order], sc.ravel()[order])

    lo_h, hi_h = sorted((h, h2))
    d = lo_h * k.min_scale / points_per_scale
    if family == "tabulated":
        lo_k, hi_k = k.support()
        R = (h + h2) * max(abs(lo_k), abs(hi_k)) * 1.05
    else:
        R = (h + h2) * k.max_scale * (tail if family == "gaussian" else 50.0 * tail)
    m = int(math.ceil(R / d))
    t = np.arange(-m, m + 1) * d
    a = eval_scaled(k, lo_h, t)
    b = eval_scaled(k, hi_h, t)
    conv = signal.fftconvolve(a, b, mode="same") * d
    return GridProfile(t, conv)


# -- serialization -------------------------------------------------------------
def kernel_to_record(k: KernelSpec) -> dict[str, str]:
    rec = {"base": k.base.family, "order": str(k.order), "rule": k.rule}
    if k.base.scale != 1.0:
        rec["scale"] = repr(k.base.scale)
    if k.base.family == "tabulated":
        if k.base.source is None:
            raise ValueError("tabulated kernel has no source path to serialise")
        rec["table"] = k.base.source
    return rec


def kernel_from_record(rec: dict[str, str], root: str | Path | None = None) -> KernelSpec:
    """Inverse of :func:`kernel_to_record`; ``table`` paths resolve against ``root``."""
    allowed = {"base", "order", "rule", "scale", "table"}
    unknown = set(rec) - allowed
    if unknown:
        raise ValueError(f"unknown kernel keys: {sorted(unknown)}")
    family = rec.get("base", "gaussian")
    scale = float(rec.get("scale", 1.0))
    if family == "tabulated":
        if "table" not in rec:
            raise ValueError("kernel.table is required for a tabulated base")
        path = Path(rec["table"])
        if root is not None and not path.is_absolute():
            path = Path(root) / path
        base = read_tabulated_csv(path, scale=scale)
    else:
        base = BaseDensity(family, scale=scale)
    return build_kernel(base, int(rec.get("order", 2)), rec.get("rule", "convolution_power"))

"""Density and distribution estimators, exact centerings, and deviations.

The density estimate at x is (1/(n h)) sum_i K((X_i - x)/h) and the
distribution estimate is (1/n) sum_i G_K((x - X_i)/h); both are computed as
exact finite sums (windowed by the kernel support, with the Gaussian treated
as supported on |u| <= 8). Centerings E f_n(x) and E F_n(x) are computed by
quadrature against the known marginal, never by simulation, so the harness
can separate bias from fluctuation exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from .kernels import KernelSpec, evaluate, kernel_cdf
from .processes import ProcessModel, SamplePath, marginal_cdf, marginal_density
from .util import fmt_float

STRATEGIES = ("direct", "binned")
CDF_CENTERS = ("expected_fnk", "true_f")

# Relative floor below which a bandwidth cannot resolve distinct data points.
_H_RANGE_FLOOR = 1e-12


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    m: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if not isinstance(self.m, int) or isinstance(self.m, bool) or self.m < 2:
            raise ValueError(f"grid needs at least 2 points, got m={self.m!r}")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.m - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.m)


DEFAULT_GRID = Grid(-2.0, 2.0, 401)


@dataclass(frozen=True, eq=False)
class EstimateCurve:
    grid: Grid
    values: np.ndarray
    kind: str  # "density" or "cdf"

    def to_csv(self, path) -> None:
        pts = self.grid.points
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,value\n")
            for x, v in zip(pts, self.values):
                fh.write(f"{fmt_float(x)},{fmt_float(v)}\n")


def _check_h(h: float, values: np.ndarray | None = None) -> None:
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0.0):
        raise ValueError(f"bandwidth must be a positive finite number, got {h!r}")
    if values is not None and values.size > 1:
        rng = float(values.max() - values.min())
        if rng > 0.0 and h < _H_RANGE_FLOOR * rng:
            raise ValueError(
                f"bandwidth {h:g} is below {_H_RANGE_FLOOR:g} of the data range {rng:g}; "
                "sums of point spikes are not a usable estimate"
            )


def _sorted_values(path: SamplePath) -> np.ndarray:
    return np.sort(path.values, kind="stable")


def _window_bounds(xs: np.ndarray, pts: np.ndarray, radius: float):
    lo = np.searchsorted(xs, pts - radius, side="left")
    hi = np.searchsorted(xs, pts + radius, side="right")
    return lo, hi


def _kernel_window_sums(xs: np.ndarray, kernel: KernelSpec, h: float, pts: np.ndarray) -> np.ndarray:
    """sum_i K((X_i - x)/h) for each x in pts; xs must be sorted ascending.

    Compact polynomial kernels reduce to prefix sums of (1, X, X^2), which
    keeps grid evaluation at O(n + m log n); the Gaussian falls back to a
    windowed slice per point at radius 8h.
    """
    fam = kernel.family
    if fam == "gaussian":
        lo, hi = _window_bounds(xs, pts, kernel.effective_radius * h)
        out = np.empty(pts.size)
        root = math.sqrt(2.0 * math.pi)
        for j in range(pts.size):
            u = (xs[lo[j]:hi[j]] - pts[j]) / h
            out[j] = np.exp(-0.5 * u * u).sum() / root
        return out

    lo, hi = _window_bounds(xs, pts, h)
    c1 = np.concatenate(([0.0], np.cumsum(xs)))
    cnt = (hi - lo).astype(np.float64)
    s1 = c1[hi] - c1[lo]

    if fam == "uniform":
        return 0.5 * cnt
    if fam == "epanechnikov":
        c2 = np.concatenate(([0.0], np.cumsum(xs * xs)))
        s2 = c2[hi] - c2[lo]
        # sum 0.75 (1 - u^2) with u = (X - x)/h over the window
        return 0.75 * (cnt - (s2 - 2.0 * pts * s1 + pts * pts * cnt) / (h * h))
    if fam == "triangular":
        mid = np.searchsorted(xs, pts, side="left")
        cnt_l = (mid - lo).astype(np.float64)
        s1_l = c1[mid] - c1[lo]
        cnt_r = (hi - mid).astype(np.float64)
        s1_r = c1[hi] - c1[mid]
        # below x: |u| = (x - X)/h; above x: |u| = (X - x)/h
        below = cnt_l - (pts * cnt_l - s1_l) / h
        above = cnt_r - (s1_r - pts * cnt_r) / h
        return below + above
    raise ValueError(f"unknown kernel family {fam!r}")  # pragma: no cover


def _cdf_window_sums(xs: np.ndarray, kernel: KernelSpec, h: float, pts: np.ndarray) -> np.ndarray:
    """sum_i G_K((x - X_i)/h) for each x in pts; xs must be sorted ascending.

    Points below the window contribute exactly 1 each (for the Gaussian this
    truncates G at 8 standard units, an error below 7e-16 per point).
    """
    lo, hi = _window_bounds(xs, pts, kernel.effective_radius * h)
    out = np.empty(pts.size)
    for j in range(pts.size):
        window = (pts[j] - xs[lo[j]:hi[j]]) / h
        out[j] = lo[j] + np.sum(kernel_cdf(kernel, window))
    return out


def _linear_bin_counts(values: np.ndarray, grid: Grid) -> np.ndarray:
    pos = (values - grid.lo) / grid.spacing
    idx = np.floor(pos).astype(np.int64)
    np.clip(idx, 0, grid.m - 2, out=idx)
    frac = pos - idx
    counts = np.zeros(grid.m)
    np.add.at(counts, idx, 1.0 - frac)
    np.add.at(counts, idx + 1, frac)
    return counts


def binned_accuracy_bound(kernel: KernelSpec, h: float, spacing: float) -> float:
    """Documented per-point bound for |binned - direct| on a covering grid.

    Linear binning moves each observation by at most one cell, so with a
    kernel of Lipschitz constant L every summand changes by at most
    L*spacing/h; the factor 10 absorbs the accumulation across the window.
    Requires spacing <= h (cells must resolve the kernel) and a Lipschitz
    kernel, both of which density_estimate enforces for the binned strategy.
    """
    if kernel.lipschitz_const is None:
        raise ValueError("no accuracy bound without a Lipschitz constant")
    return 10.0 * kernel.lipschitz_const * spacing / h


def density_estimate(
    path: SamplePath,
    kernel: KernelSpec,
    h: float,
    grid: Grid = DEFAULT_GRID,
    strategy: str = "direct",
) -> EstimateCurve:
    """Kernel density estimate on a grid, as an exact sum or binned.

    The direct strategy is the defining sum. The binned strategy distributes
    each observation linearly over its two neighboring grid nodes and then
    convolves once with kernel taps; it must agree with direct within
    binned_accuracy_bound per point, and rejects grids that do not cover
    the data inflated by the kernel window.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    xs = _sorted_values(path)
    _check_h(h, xs)
    n = xs.size
    if strategy == "direct":
        values = _kernel_window_sums(xs, kernel, h, grid.points) / (n * h)
        return EstimateCurve(grid=grid, values=values, kind="density")

    if kernel.lipschitz_const is None:
        raise ValueError(
            "binned evaluation needs a Lipschitz kernel for its error bound; "
            f"the {kernel.family} kernel is flagged as not Lipschitz"
        )
    radius = kernel.effective_radius * h
    if grid.lo > xs[0] - radius or grid.hi < xs[-1] + radius:
        raise ValueError(
            f"binned evaluation needs the grid to cover [{xs[0] - radius:g}, "
            f"{xs[-1] + radius:g}], got [{grid.lo:g}, {grid.hi:g}]"
        )
    spacing = grid.spacing
    if spacing > h:
        raise ValueError(
            f"binned evaluation needs grid spacing <= h, got spacing {spacing:g} > h {h:g}"
        )
    counts = _linear_bin_counts(xs, grid)
    m_taps = int(math.ceil(radius / spacing))
    offsets = np.arange(-m_taps, m_taps + 1, dtype=float)
    taps = evaluate(kernel, offsets * spacing / h)
    values = np.convolve(counts, taps, mode="same") / (n * h)
    return EstimateCurve(grid=grid, values=values, kind="density")


def cdf_estimate(path: SamplePath, kernel: KernelSpec, h: float, grid: Grid = DEFAULT_GRID) -> EstimateCurve:
    """Smoothed distribution estimate (1/n) sum_i G_K((x - X_i)/h) on a grid.

    Only symmetric unit-mass kernels are accepted, which keeps the estimate a
    genuine distribution function up to the kernel window at the edges.
    """
    if not (kernel.is_symmetric and kernel.integrates_to_one):
        raise ValueError("cdf_estimate needs a symmetric kernel with unit mass")
    xs = _sorted_values(path)
    _check_h(h, xs)
    values = _cdf_window_sums(xs, kernel, h, grid.points) / xs.size
    np.clip(values, 0.0, 1.0, out=values)
    return EstimateCurve(grid=grid, values=values, kind="cdf")


def cdf_estimate_at(path: SamplePath, kernel: KernelSpec, h: float, x: float) -> float:
    """The distribution estimate at a single point."""
    if not (kernel.is_symmetric and kernel.integrates_to_one):
        raise ValueError("cdf_estimate needs a symmetric kernel with unit mass")
    xs = _sorted_values(path)
    _check_h(h, xs)
    val = _cdf_window_sums(xs, kernel, h, np.asarray([float(x)]))[0] / xs.size
    return min(1.0, max(0.0, val))


def _quad_to_tolerance(integrand, panels, points=None) -> float:
    total = 0.0
    err = 0.0
    for a, b in panels:
        val, e = quad(integrand, a, b, epsabs=1e-12, epsrel=1e-12, limit=200, points=points)
        total += val
        err += e
    if err > 1e-10:
        raise ArithmeticError(f"quadrature error estimate {err:.3g} exceeds 1e-10")
    return total


def expected_density(model: ProcessModel, kernel: KernelSpec, h: float, x: float) -> float:
    """E f_n(x) = integral K(u) f(x + h u) du, by adaptive quadrature.

    This is the exact expectation of the estimator under the stationary
    marginal; it depends on n only through h.
    """
    _check_h(h)
    r = kernel.effective_radius
    panels = [(-r, 0.0), (0.0, r)] if kernel.family == "triangular" else [(-r, r)]

    def integrand(u):
        return evaluate(kernel, u) * marginal_density(model, x + h * u)

    return _quad_to_tolerance(integrand, panels)


def expected_cdf(model: ProcessModel, kernel: KernelSpec, h: float, x: float) -> float:
    """E F_n(x) = E G_K((x - X)/h), by adaptive quadrature.

    Integrating G_K((x - u)/h) f(u) du by parts turns it into
    integral K(v) F(x - h v) dv, whose integrand vanishes outside the kernel
    window; that compact form is what is integrated here.
    """
    _check_h(h)
    r = kernel.effective_radius
    panels = [(-r, 0.0), (0.0, r)] if kernel.family == "triangular" else [(-r, r)]

    def integrand(v):
        return evaluate(kernel, v) * marginal_cdf(model, x - h * v)

    return _quad_to_tolerance(integrand, panels)


def _legendre_panels(kernel: KernelSpec, order: int):
    r = kernel.effective_radius
    panels = [(-r, 0.0), (0.0, r)] if kernel.family == "triangular" else [(-r, r)]
    nodes, weights = leggauss(order)
    out = []
    for a, b in panels:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        out.append((mid + half * nodes, half * weights))
    return out


def expected_density_curve(
    model: ProcessModel, kernel: KernelSpec, h: float, grid: Grid, order: int = 96
) -> EstimateCurve:
    """E f_n over a whole grid by fixed-order Gauss-Legendre panels.

    Vectorized companion to expected_density for grid-sized workloads; the
    integrand is smooth on each panel, so 96 nodes give far better than the
    1e-10 the adaptive routine targets (the tests compare the two).
    """
    _check_h(h)
    xs = grid.points
    acc = np.zeros(xs.size)
    for nodes, weights in _legendre_panels(kernel, order):
        kw = weights * evaluate(kernel, nodes)
        acc += marginal_density(model, xs[:, None] + h * nodes[None, :]) @ kw
    return EstimateCurve(grid=grid, values=acc, kind="density")


def bias(model: ProcessModel, kernel: KernelSpec, h: float, x: float) -> float:
    """E f_n(x) - f(x), the exact smoothing bias at x."""
    return expected_density(model, kernel, h, x) - marginal_density(model, x)


def _check_same_grid(a: EstimateCurve, b: EstimateCurve) -> None:
    if a.grid != b.grid:
        raise ValueError("curves live on different grids")


def sup_deviation(a: EstimateCurve, b: EstimateCurve) -> float:
    """max_j |a_j - b_j| over the shared grid.

    This is a lower bound for the continuum supremum; the discretization
    gap is at most spacing times the sum of the two curves' Lipschitz
    constants (for a density estimate, at most lipschitz_const/h^2 each).
    """
    _check_same_grid(a, b)
    return float(np.max(np.abs(a.values - b.values)))


def lp_deviation(a: EstimateCurve, b: EstimateCurve, p: float) -> float:
    """(integral |a - b|^p dx)^{1/p} over the grid span, by the trapezoid rule."""
    if not (isinstance(p, (int, float)) and math.isfinite(p) and p >= 1.0):
        raise ValueError(f"p must be a finite number >= 1, got {p!r}")
    _check_same_grid(a, b)
    diff = np.abs(a.values - b.values) ** p
    return float(np.trapezoid(diff, a.grid.points)) ** (1.0 / p)


def clt_statistic(
    path: SamplePath, kernel: KernelSpec, h: float, x: float, model: ProcessModel | None = None
) -> float:
    """sqrt(n h) (f_n(x) - E f_n(x)) / sqrt(|K|_2^2 f(x)).

    Centered at the exact expectation, so the statistic is mean-zero at every
    finite n and its limit law is standard normal when the usual bandwidth
    and dependence conditions hold.
    """
    m = model if model is not None else path.model
    fx = marginal_density(m, x)
    if not fx > 1e-300:
        raise ValueError(f"marginal density vanishes at x={x:g}")
    xs = _sorted_values(path)
    _check_h(h, xs)
    n = xs.size
    fn = _kernel_window_sums(xs, kernel, h, np.asarray([float(x)]))[0] / (n * h)
    center = expected_density(m, kernel, h, x)
    return math.sqrt(n * h) * (fn - center) / math.sqrt(kernel.l2_norm_sq * fx)


def cdf_clt_statistic(
    path: SamplePath,
    kernel: KernelSpec,
    h: float,
    x: float,
    center: str = "expected_fnk",
    model: ProcessModel | None = None,
) -> float:
    """sqrt(n) (F_n(x) - center) / sqrt(F(x)(1 - F(x))).

    center "expected_fnk" uses the exact E F_n(x); "true_f" uses F(x) itself,
    which folds the smoothing bias into the statistic.
    """
    if center not in CDF_CENTERS:
        raise ValueError(f"center must be one of {CDF_CENTERS}, got {center!r}")
    m = model if model is not None else path.model
    fx = marginal_cdf(m, x)
    if not (1e-12 < fx < 1.0 - 1e-12):
        raise ValueError(f"F(x) = {fx:g} is too close to 0 or 1 for standardization")
    fn = cdf_estimate_at(path, kernel, h, x)
    c = expected_cdf(m, kernel, h, x) if center == "expected_fnk" else fx
    return math.sqrt(len(path)) * (fn - c) / math.sqrt(fx * (1.0 - fx))

"""Histogram-valued observations and L2 Wasserstein primitives.

Every histogram is read as a piecewise-uniform density, so its quantile
function is piecewise linear. All integrals and moments below are computed
in closed form on the knots of those functions; nothing uses quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

WEIGHT_TOL = 1e-9
CONTIGUITY_TOL = 1e-9


class DomainError(ValueError):
    """Input is well-formed but outside the domain of an operation."""


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class Histogram:
    """Contiguous histogram: ``len(bounds) == len(weights) + 1``.

    Bin ``h`` spans ``[bounds[h], bounds[h+1]]`` and carries ``weights[h]``.
    Zero-width bins are allowed and model point masses.
    """

    bounds: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        bounds = _as_float_array(self.bounds, "bounds")
        weights = _as_float_array(self.weights, "weights")
        if len(weights) < 1 or len(bounds) != len(weights) + 1:
            raise DomainError(
                f"ragged histogram: {len(bounds)} bounds for {len(weights)} weights"
            )
        if np.any(np.diff(bounds) < 0):
            raise DomainError("bounds must be non-decreasing")
        if np.any(weights <= 0) or np.any(weights > 1 + WEIGHT_TOL):
            raise DomainError("bin weights must lie in (0, 1]")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise DomainError(f"weights sum to {weights.sum():.12g}, expected 1")
        bounds.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "weights", weights)

    @property
    def n_bins(self) -> int:
        return len(self.weights)

    @property
    def cumulative_weights(self) -> np.ndarray:
        w = np.concatenate(([0.0], np.cumsum(self.weights)))
        w[-1] = 1.0
        return w

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bounds[:-1] + self.bounds[1:])

    @property
    def radii(self) -> np.ndarray:
        return 0.5 * (self.bounds[1:] - self.bounds[:-1])

    def shifted(self, c: float) -> "Histogram":
        return Histogram(self.bounds + c, self.weights)

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return np.array_equal(self.bounds, other.bounds) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self):
        return hash((self.bounds.tobytes(), self.weights.tobytes()))


@dataclass(frozen=True, eq=False)
class EquiDepthHistogram:
    """``s`` bins of probability ``1/s`` each, given by centers and radii."""

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        centers = _as_float_array(self.centers, "centers")
        radii = _as_float_array(self.radii, "radii")
        if len(centers) < 1 or len(centers) != len(radii):
            raise DomainError("centers and radii must be non-empty and of equal length")
        if np.any(radii < 0):
            raise DomainError("radii must be non-negative")
        upper = centers[:-1] + radii[:-1]
        lower = centers[1:] - radii[1:]
        if np.any(upper > lower + CONTIGUITY_TOL * np.maximum(1.0, np.abs(upper))):
            raise DomainError("bins overlap or are out of order")
        centers.flags.writeable = False
        radii.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def from_bounds(cls, bounds) -> "EquiDepthHistogram":
        b = np.asarray(bounds, dtype=float)
        return cls(0.5 * (b[:-1] + b[1:]), 0.5 * (b[1:] - b[:-1]))

    @property
    def s(self) -> int:
        return len(self.centers)

    @property
    def bounds(self) -> np.ndarray:
        """Lower bound of the first bin followed by the upper bound of every bin."""
        return np.concatenate(([self.centers[0] - self.radii[0]], self.centers + self.radii))

    def to_histogram(self) -> Histogram:
        return Histogram(self.bounds, np.full(self.s, 1.0 / self.s))

    def shifted(self, c: float) -> "EquiDepthHistogram":
        return EquiDepthHistogram(self.centers + c, self.radii)

    def __eq__(self, other):
        if not isinstance(other, EquiDepthHistogram):
            return NotImplemented
        return np.array_equal(self.centers, other.centers) and np.array_equal(
            self.radii, other.radii
        )

    def __hash__(self):
        return hash((self.centers.tobytes(), self.radii.tobytes()))


@dataclass(frozen=True, eq=False)
class QuantileFunction:
    """Piecewise-linear quantile function through ``(levels[k], values[k])``."""

    levels: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        levels = _as_float_array(self.levels, "levels")
        values = _as_float_array(self.values, "values")
        if len(levels) < 2 or len(levels) != len(values):
            raise DomainError("need at least two knots with matching values")
        if levels[0] != 0.0 or levels[-1] != 1.0 or np.any(np.diff(levels) <= 0):
            raise DomainError("levels must increase strictly from 0 to 1")
        if np.any(np.diff(values) < 0):
            raise DomainError("quantile values must be non-decreasing")
        levels.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > 1)):
            raise DomainError("quantile levels must lie in [0, 1]")
        return np.interp(t, self.levels, self.values)

    def shifted(self, c: float) -> "QuantileFunction":
        return QuantileFunction(self.levels, self.values + c)


@dataclass(frozen=True)
class DistributionSummary:
    mean: float
    std: float
    skewness: float
    kurtosis: float
    degenerate: bool = field(default=False)


def histogram_from_samples(samples: Sequence[float], K: int) -> EquiDepthHistogram:
    """Equi-depth histogram whose bounds are the empirical ``l/K`` quantiles.

    Quantiles interpolate linearly between order statistics (the usual
    "type 7" rule, numpy's default).
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("cannot build a histogram from an empty sample")
    if int(K) != K or K < 1:
        raise DomainError(f"bin count must be a positive integer, got {K!r}")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples contain non-finite values")
    bounds = np.quantile(x, np.arange(K + 1) / K, method="linear")
    # np.quantile can be off by one ulp against monotonicity on ties
    bounds = np.maximum.accumulate(bounds)
    return EquiDepthHistogram.from_bounds(bounds)


def _as_histogram(h) -> Histogram:
    if isinstance(h, EquiDepthHistogram):
        return h.to_histogram()
    if isinstance(h, Histogram):
        return h
    raise TypeError(f"expected a histogram, got {type(h).__name__}")


def to_quantile_function(h) -> QuantileFunction:
    h = _as_histogram(h)
    return QuantileFunction(h.cumulative_weights, h.bounds)


def homogenize(histograms: Sequence, K: int) -> list[EquiDepthHistogram]:
    """Re-quantize every histogram onto ``K`` bins of probability ``1/K``."""
    if int(K) != K or K < 1:
        raise DomainError(f"bin count must be a positive integer, got {K!r}")
    levels = np.arange(K + 1) / K
    out = []
    for h in histograms:
        bounds = to_quantile_function(h)(levels)
        out.append(EquiDepthHistogram.from_bounds(bounds))
    return out


def _merged(f: QuantileFunction, g: QuantileFunction):
    t = np.union1d(f.levels, g.levels)
    return t, f(t), g(t)


def _segment_integral_sq(dt, a, b):
    """Exact integral of the square of the line from ``a`` to ``b`` over ``dt``."""
    return dt * (a * a + a * b + b * b) / 3.0


def _segment_integral_prod(dt, f0, f1, g0, g1):
    return dt * (2 * f0 * g0 + f0 * g1 + f1 * g0 + 2 * f1 * g1) / 6.0


def wasserstein_sq_integral(f: QuantileFunction, g: QuantileFunction) -> float:
    t, fv, gv = _merged(f, g)
    d = fv - gv
    return float(np.sum(_segment_integral_sq(np.diff(t), d[:-1], d[1:])))


def wasserstein_sq_closed(h1: EquiDepthHistogram, h2: EquiDepthHistogram) -> float:
    if h1.s != h2.s:
        raise DomainError(
            f"bin counts differ ({h1.s} vs {h2.s}); homogenize the histograms first"
        )
    dc = h1.centers - h2.centers
    dr = h1.radii - h2.radii
    return float(np.mean(dc * dc + dr * dr / 3.0))


def _qf_mean(qf: QuantileFunction) -> float:
    return float(np.sum(np.diff(qf.levels) * (qf.values[:-1] + qf.values[1:]) / 2.0))


def decompose_distance(f: QuantileFunction, g: QuantileFunction):
    """Split the squared distance into ``(location, scale, shape, rho)``.

    ``rho`` is the correlation of the two quantile functions over ``[0, 1]``.
    If either standard deviation is zero, ``rho`` is 1 and shape is 0.
    """
    t, fv, gv = _merged(f, g)
    dt = np.diff(t)
    mu_f, mu_g = _qf_mean(f), _qf_mean(g)
    fc, gc = fv - mu_f, gv - mu_g
    var_f = float(np.sum(_segment_integral_sq(dt, fc[:-1], fc[1:])))
    var_g = float(np.sum(_segment_integral_sq(dt, gc[:-1], gc[1:])))
    cov = float(np.sum(_segment_integral_prod(dt, fc[:-1], fc[1:], gc[:-1], gc[1:])))
    sd_f, sd_g = np.sqrt(max(var_f, 0.0)), np.sqrt(max(var_g, 0.0))
    location = (mu_f - mu_g) ** 2
    scale = float((sd_f - sd_g) ** 2)
    if sd_f == 0.0 or sd_g == 0.0:
        return location, scale, 0.0, 1.0
    rho = cov / (sd_f * sd_g)
    shape = float(2.0 * sd_f * sd_g - 2.0 * cov)
    return location, scale, shape, float(min(1.0, max(-1.0, rho)))


def _check_common_s(histograms) -> int:
    if len(histograms) == 0:
        raise DomainError("need at least one histogram")
    sizes = {h.s for h in histograms}
    if len(sizes) != 1:
        raise DomainError(f"histograms have differing bin counts {sorted(sizes)}")
    return sizes.pop()


def frechet_mean(histograms: Sequence[EquiDepthHistogram]) -> EquiDepthHistogram:
    _check_common_s(histograms)
    centers = np.mean([h.centers for h in histograms], axis=0)
    radii = np.mean([h.radii for h in histograms], axis=0)
    return EquiDepthHistogram(centers, radii)


def distributional_variance(histograms: Sequence[EquiDepthHistogram]) -> float:
    bary = frechet_mean(histograms)
    return float(np.mean([wasserstein_sq_closed(h, bary) for h in histograms]))


# E[U^k] for U uniform on [-1, 1]
_UNIFORM_MOMENTS = (1.0, 0.0, 1.0 / 3.0, 0.0, 1.0 / 5.0)


def _central_moment(centers, radii, weights, mu, k):
    u = centers - mu
    total = np.zeros_like(u)
    for j in range(0, k + 1, 2):
        total = total + math.comb(k, j) * u ** (k - j) * radii**j * _UNIFORM_MOMENTS[j]
    return float(np.sum(weights * total))


def summarize(h) -> DistributionSummary:
    """Exact moments of the piecewise-uniform density."""
    h = _as_histogram(h)
    c, r, w = h.centers, h.radii, h.weights
    mu = float(np.sum(w * c))
    m2 = _central_moment(c, r, w, mu, 2)
    sd = float(np.sqrt(max(m2, 0.0)))
    if sd == 0.0 or sd <= 1e-14 * max(1.0, abs(mu)):
        return DistributionSummary(mu, 0.0, 0.0, 0.0, degenerate=True)
    m3 = _central_moment(c, r, w, mu, 3)
    m4 = _central_moment(c, r, w, mu, 4)
    return DistributionSummary(mu, sd, m3 / sd**3, m4 / m2**2)

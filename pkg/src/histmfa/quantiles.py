"""Quantile tables: one block of quantile variables per distributional variable."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .distributions import DomainError, EquiDepthHistogram, distributional_variance


@dataclass(frozen=True, eq=False)
class UnitWeights:
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DomainError("unit weights must be a non-empty vector")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("unit weights must be positive and finite")
        if abs(w.sum() - 1.0) > 1e-12:
            raise DomainError(f"unit weights sum to {w.sum():.15g}, expected 1")
        w.flags.writeable = False
        object.__setattr__(self, "values", w)

    @classmethod
    def uniform(cls, n: int) -> "UnitWeights":
        return cls(np.full(n, 1.0 / n))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class QuantileTable:
    """``n x (K+1)`` table of quantiles; column 0 holds minima, column K maxima.

    ``means`` is the vector of original column means once the table has been
    centered, and ``None`` before.
    """

    variable: str
    values: np.ndarray
    means: np.ndarray | None = None

    def __post_init__(self):
        q = np.array(self.values, dtype=float)
        if q.ndim != 2 or q.shape[1] < 2 or q.shape[0] < 1:
            raise DomainError("a quantile table needs at least one row and two columns")
        if not np.all(np.isfinite(q)):
            raise DomainError("quantile table contains non-finite values")
        q.flags.writeable = False
        object.__setattr__(self, "values", q)
        if self.means is not None:
            m = np.array(self.means, dtype=float)
            m.flags.writeable = False
            object.__setattr__(self, "means", m)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def K(self) -> int:
        return self.values.shape[1] - 1

    @property
    def centered(self) -> bool:
        return self.means is not None

    @property
    def raw(self) -> np.ndarray:
        """Uncentered quantiles."""
        return self.values + self.means if self.centered else self.values

    @property
    def column_labels(self) -> list[str]:
        return [f"{self.variable}:q{l}" for l in range(self.K + 1)]


def build_quantile_table(
    variable: str, histograms: Sequence[EquiDepthHistogram], K: int
) -> QuantileTable:
    if not histograms:
        raise DomainError("no histograms supplied")
    bad = [i for i, h in enumerate(histograms) if h.s != K]
    if bad:
        raise DomainError(
            f"variable {variable!r}: histograms {bad} do not have {K} bins; homogenize first"
        )
    rows = np.array([h.bounds for h in histograms])
    # keep rows monotone against last-ulp drift from the center/radius round trip
    rows = np.maximum.accumulate(rows, axis=1)
    return QuantileTable(variable, rows)


def center_columns(t: QuantileTable, w: UnitWeights | None = None) -> QuantileTable:
    """Subtract (weighted) column means; the means are kept on the result."""
    if t.centered:
        raise DomainError(f"table {t.variable!r} is already centered")
    weights = UnitWeights.uniform(t.n) if w is None else w
    means = weights.values @ t.values
    return QuantileTable(t.variable, t.values - means, means)


def covariance_block(t: QuantileTable, w: UnitWeights) -> np.ndarray:
    if not t.centered:
        raise DomainError(f"table {t.variable!r} must be centered first")
    q = t.values
    s = q.T @ (w.values[:, None] * q)
    return 0.5 * (s + s.T)


@dataclass(frozen=True)
class GapReport:
    """Trace of the quantile covariance against the Wasserstein variance.

    ``trace`` is the raw sum of quantile-column variances and ``trace_mean``
    its average over the K+1 columns. ``trace_per_bin`` divides it by the
    bin count K so it lives on the same scale as ``variance``. ``gap`` is
    their difference and ``gap_explicit`` the same quantity evaluated from
    centered centers and radii.
    """

    trace: float
    trace_mean: float
    trace_per_bin: float
    variance: float
    gap: float
    gap_explicit: float


def trace_variance_gap(
    t: QuantileTable, histograms: Sequence[EquiDepthHistogram]
) -> GapReport:
    """Compare the quantile-table trace with the distributional variance.

    Uses equal unit weights ``1/n`` throughout, as the variance does.
    """
    if not t.centered:
        raise DomainError("table must be centered")
    if len(histograms) != t.n:
        raise DomainError(f"table has {t.n} rows but {len(histograms)} histograms given")
    K = t.K
    if any(h.s != K for h in histograms):
        raise DomainError("histogram bin counts do not match the table")
    expected = np.array([h.bounds for h in histograms])
    if not np.allclose(expected, t.raw, rtol=1e-9, atol=1e-9 * max(1.0, np.abs(expected).max())):
        raise DomainError("table does not match the supplied histograms")

    n = t.n
    trace = float(np.trace(covariance_block(t, UnitWeights.uniform(n))))
    variance = distributional_variance(histograms)
    trace_per_bin = trace / K

    c = np.array([h.centers for h in histograms])
    r = np.array([h.radii for h in histograms])
    cc = c - c.mean(axis=0)
    rc = r - r.mean(axis=0)
    explicit = (np.sum(t.values**2) - np.sum(cc**2 + rc**2 / 3.0)) / (n * K)
    return GapReport(
        trace, trace / (K + 1), trace_per_bin, variance, trace_per_bin - variance, float(explicit)
    )


@dataclass(frozen=True, eq=False)
class BlockSet:
    """Centered quantile tables sharing the same units, in a fixed order.

    ``column_weights`` holds one vector per block, multiplied into the block
    weight: 1 for an ordinary active column, 0 for a supplementary column,
    or a value in (0, 1) to down-weight a column.
    """

    blocks: tuple[QuantileTable, ...]
    column_weights: tuple[np.ndarray, ...] = field(default=())

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise DomainError("a block set needs at least one block")
        ns = {b.n for b in blocks}
        if len(ns) != 1:
            raise DomainError(f"blocks have differing unit counts {sorted(ns)}")
        names = [b.variable for b in blocks]
        if len(set(names)) != len(names):
            raise DomainError("block variable ids must be unique")
        if not all(b.centered for b in blocks):
            raise DomainError("all blocks must be centered")
        if self.column_weights:
            cw = tuple(np.array(c, dtype=float) for c in self.column_weights)
            if len(cw) != len(blocks) or any(
                len(c) != b.K + 1 for c, b in zip(cw, blocks)
            ):
                raise DomainError("column weights do not match block shapes")
            if any(np.any((c < 0) | (c > 1)) for c in cw):
                raise DomainError("column weights must lie in [0, 1]")
        else:
            cw = tuple(np.ones(b.K + 1) for b in blocks)
        for c in cw:
            c.flags.writeable = False
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "column_weights", cw)

    @property
    def p(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return self.blocks[0].n

    @property
    def variables(self) -> list[str]:
        return [b.variable for b in self.blocks]

    def active(self, j: int) -> np.ndarray:
        return self.column_weights[j] > 0


@dataclass(frozen=True, eq=False)
class GlobalMatrix:
    """Column-wise concatenation of a block set with its bookkeeping."""

    values: np.ndarray
    boundaries: tuple[int, ...]
    column_weights: np.ndarray
    labels: tuple[str, ...]

    def block_of(self, k: int) -> tuple[int, int]:
        """Map a global column index to ``(block, local column)``."""
        if not 0 <= k < self.values.shape[1]:
            raise IndexError(k)
        j = int(np.searchsorted(self.boundaries, k, side="right")) - 1
        return j, k - self.boundaries[j]

    def global_index(self, j: int, l: int) -> int:
        return self.boundaries[j] + l

    def block_slice(self, j: int) -> slice:
        return slice(self.boundaries[j], self.boundaries[j + 1])


def concatenate(blocks: BlockSet) -> GlobalMatrix:
    values = np.hstack([b.values for b in blocks.blocks])
    widths = [b.K + 1 for b in blocks.blocks]
    boundaries = tuple(int(x) for x in np.concatenate(([0], np.cumsum(widths))))
    labels = tuple(lab for b in blocks.blocks for lab in b.column_labels)
    return GlobalMatrix(values, boundaries, np.concatenate(blocks.column_weights), labels)


def extremes_column_weights(K: int, policy: str) -> np.ndarray:
    """Column weights for one block under an extreme-quantile policy.

    ``policy`` is ``"active"``, ``"supplementary"`` or ``"weight:W"`` with
    ``0 < W <= 1``; it applies to the minimum and maximum columns only.
    """
    cw = np.ones(K + 1)
    if policy == "active":
        return cw
    if policy == "supplementary":
        if K < 2:
            raise DomainError("need K >= 2 to make the extremes supplementary")
        cw[[0, K]] = 0.0
        return cw
    if policy.startswith("weight:"):
        try:
            value = float(policy.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad extremes weight in {policy!r}") from None
        if not 0 < value <= 1:
            raise DomainError(f"extremes weight must be in (0, 1], got {value}")
        cw[[0, K]] = value
        return cw
    raise DomainError(f"unknown extremes policy {policy!r}")


def with_column_weights(blocks: BlockSet, weights: Sequence[np.ndarray]) -> BlockSet:
    return replace(blocks, column_weights=tuple(weights))

"""Multiple factor analysis of quantile blocks.

The fit runs in two steps. First, each block gets its own PCA under the unit
metric ``W``, and the inverse of its first eigenvalue becomes its weight
``a_j``. Second, the concatenated blocks are analysed as the triplet
``(Q, W, A)`` with ``A`` holding ``a_j`` on the columns of block ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .distributions import DistributionSummary, DomainError
from .quantiles import BlockSet, GlobalMatrix, QuantileTable, UnitWeights, concatenate, covariance_block

RANK_TOL = 1e-12
MOMENTS = ("mean", "std", "skewness", "kurtosis")


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """``M = U diag(singular_values) V^T`` with ``U^T W U = V^T A V = I``."""

    singular_values: np.ndarray
    U: np.ndarray
    V: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.singular_values**2

    @property
    def rank(self) -> int:
        return len(self.singular_values)

    def truncated(self, rel_tol: float = RANK_TOL) -> "EigenSystem":
        """Drop axes whose eigenvalue is below ``rel_tol`` times the first."""
        ev = self.eigenvalues
        if ev.size == 0 or ev[0] == 0:
            keep = 0
        else:
            keep = int(np.sum(ev > rel_tol * ev[0]))
        return EigenSystem(self.singular_values[:keep], self.U[:, :keep], self.V[:, :keep])


def _orient(U: np.ndarray, V: np.ndarray, col_metric: np.ndarray):
    # largest |loading| among the weighted columns points positive; ties go to the first index
    scaled = np.abs(V) * (col_metric[:, None] > 0)
    idx = np.argmax(scaled, axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def weighted_svd(M, row_weights, col_weights) -> EigenSystem:
    """Generalized SVD of ``M`` under diagonal row and column metrics.

    Columns with zero metric are excluded from the decomposition; their rows
    of ``V`` are zero. Axes are sorted by decreasing singular value and
    oriented so the largest-magnitude loading of each is positive.
    """
    M = np.asarray(M, dtype=float)
    w = np.asarray(row_weights, dtype=float)
    a = np.asarray(col_weights, dtype=float)
    if M.ndim != 2 or M.shape != (len(w), len(a)):
        raise DomainError(f"shape mismatch: matrix {M.shape}, metrics {len(w)}, {len(a)}")
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(w)) and np.all(np.isfinite(a))):
        raise DomainError("non-finite entries in weighted SVD input")
    if np.any(w <= 0) or np.any(a < 0):
        raise DomainError("row metric must be positive and column metric non-negative")
    active = a > 0
    if not np.any(active):
        raise DomainError("no column carries positive weight")

    sw = np.sqrt(w)
    sa = np.sqrt(a[active])
    tilde = sw[:, None] * M[:, active] * sa[None, :]
    Ut, s, Vt = np.linalg.svd(tilde, full_matrices=False)
    U = Ut / sw[:, None]
    V = np.zeros((len(a), len(s)))
    V[active] = Vt.T / sa[:, None]
    U, V = _orient(U, V, a)
    return EigenSystem(s, U, V)


@dataclass(frozen=True, eq=False)
class PartialPca:
    variable: str
    eigen: EigenSystem
    first_eigenvalue: float
    weight: float
    scores: np.ndarray

    @property
    def percent(self) -> np.ndarray:
        ev = self.eigen.eigenvalues
        return 100.0 * ev / ev.sum()


def _degenerate_tol(t: QuantileTable) -> float:
    scale = max(1.0, float(np.abs(t.raw).max()))
    return 1e-12 * scale


def partial_pca(
    t: QuantileTable, w: UnitWeights, column_weights: np.ndarray | None = None
) -> PartialPca:
    if not t.centered:
        raise DomainError(f"table {t.variable!r} must be centered first")
    cw = np.ones(t.K + 1) if column_weights is None else np.asarray(column_weights, float)
    if not np.any(cw > 0):
        raise DomainError(f"degenerate block {t.variable!r}: no active columns")
    eig = weighted_svd(t.values, w.values, cw)
    if eig.rank == 0 or eig.singular_values[0] <= _degenerate_tol(t):
        raise DomainError(f"degenerate block {t.variable!r}: zero variance")
    eig = eig.truncated()
    first = float(eig.eigenvalues[0])
    return PartialPca(t.variable, eig, first, 1.0 / first, eig.U * eig.singular_values)


def _wcorr(x: np.ndarray, Y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted Pearson correlation of each column of ``x`` with each column of ``Y``.

    Constant columns give NaN.
    """
    x = np.atleast_2d(x.T).T
    Y = np.atleast_2d(Y.T).T
    xc = x - w @ x
    yc = Y - w @ Y
    cov = xc.T @ (w[:, None] * yc)
    sx = np.sqrt(w @ xc**2)
    sy = np.sqrt(w @ yc**2)
    tol_x = 1e-12 * np.maximum(1.0, np.abs(x).max(axis=0))
    tol_y = 1e-12 * np.maximum(1.0, np.abs(Y).max(axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = cov / np.outer(sx, sy)
    r[(sx <= tol_x)] = np.nan
    r[:, (sy <= tol_y)] = np.nan
    return np.clip(r, -1.0, 1.0)


def rv_coefficient(t1: QuantileTable, t2: QuantileTable, w: UnitWeights) -> float:
    if t1.n != t2.n or len(w) != t1.n:
        raise DomainError("tables must share the same units")
    q1, q2 = t1.values, t2.values
    s12 = q1.T @ (w.values[:, None] * q2)
    s11 = covariance_block(t1, w)
    s22 = covariance_block(t2, w)
    num = np.sum(s12 * s12)
    den = np.sqrt(np.sum(s11 * s11) * np.sum(s22 * s22))
    if den <= 1e-300 or np.sum(s11 * s11) == 0 or np.sum(s22 * s22) == 0:
        raise DomainError("RV coefficient undefined for a zero-variance table")
    return float(min(1.0, num / den))


@dataclass(frozen=True, eq=False)
class MfaModel:
    """Fitted model. Arrays are indexed ``[row, axis]`` throughout.

    ``column_coordinates`` are the column scores ``Q^T W u`` for every column
    of the concatenated table, supplementary ones included.
    """

    blocks: BlockSet
    unit_weights: UnitWeights
    matrix: GlobalMatrix
    partials: tuple[PartialPca, ...]
    block_weights: np.ndarray
    column_metric: np.ndarray
    eigen: EigenSystem
    row_coordinates: np.ndarray
    partial_row_coordinates: np.ndarray
    column_coordinates: np.ndarray
    rv: np.ndarray

    @property
    def p(self) -> int:
        return self.blocks.p

    @property
    def rank(self) -> int:
        return self.eigen.rank

    @property
    def variables(self) -> list[str]:
        return self.blocks.variables

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigen.eigenvalues

    @property
    def percent(self) -> np.ndarray:
        ev = self.eigenvalues
        return 100.0 * ev / ev.sum()

    @property
    def cumulative_percent(self) -> np.ndarray:
        return np.cumsum(self.percent)

    @property
    def total_inertia(self) -> float:
        return float(
            sum(
                pp.weight * np.sum(np.diag(covariance_block(b, self.unit_weights)) * cw)
                for pp, b, cw in zip(self.partials, self.blocks.blocks, self.blocks.column_weights)
            )
        )

    def block_index(self, variable: str) -> int:
        try:
            return self.variables.index(variable)
        except ValueError:
            raise DomainError(f"unknown variable {variable!r}") from None

    def _check_axis(self, axis: int):
        if not 0 <= axis < self.rank:
            raise DomainError(f"axis {axis} outside model rank {self.rank}")

    def variable_scores(self, j: int, axis: int) -> np.ndarray:
        """Scores of the quantile columns of block ``j``: ``a_j Q_j^T W u``."""
        self._check_axis(axis)
        sl = self.matrix.block_slice(j)
        return self.block_weights[j] * self.column_coordinates[sl, axis]

    def compromise_scores(self, axis: int) -> np.ndarray:
        widths = {b.K for b in self.blocks.blocks}
        if len(widths) != 1:
            raise DomainError("compromise scores need the same quantile count in every block")
        return sum(self.variable_scores(j, axis) for j in range(self.p)) / self.p

    def individual_coordinates(self, axis: int) -> np.ndarray:
        self._check_axis(axis)
        return self.row_coordinates[:, axis]

    def partial_individual_coordinates(self, j: int, axis: int) -> np.ndarray:
        self._check_axis(axis)
        return self.partial_row_coordinates[j][:, axis]

    def column_correlations(self) -> np.ndarray:
        """Correlation of every column with every axis (NaN for constant columns)."""
        return _wcorr(self.matrix.values, self.row_coordinates, self.unit_weights.values)

    def partial_axis_correlations(self, j: int, n_dims: int = 3) -> np.ndarray:
        """Correlations of block ``j``'s partial PCA axes (rows) with the global axes."""
        scores = self.partials[j].scores[:, :n_dims]
        return _wcorr(scores, self.row_coordinates, self.unit_weights.values)


def global_mfa(blocks: BlockSet, w: UnitWeights | None = None) -> MfaModel:
    w = UnitWeights.uniform(blocks.n) if w is None else w
    if len(w) != blocks.n:
        raise DomainError("unit weights do not match the number of units")
    partials = []
    degenerate = []
    for j, t in enumerate(blocks.blocks):
        try:
            partials.append(partial_pca(t, w, blocks.column_weights[j]))
        except DomainError:
            degenerate.append(t.variable)
    if degenerate:
        raise DomainError(f"degenerate block(s): {', '.join(degenerate)}")

    matrix = concatenate(blocks)
    a = np.array([pp.weight for pp in partials])
    metric = np.concatenate([a[j] * cw for j, cw in enumerate(blocks.column_weights)])
    eig = weighted_svd(matrix.values, w.values, metric).truncated()

    rows = eig.U * eig.singular_values
    cols = matrix.values.T @ (w.values[:, None] * eig.U)
    partial_rows = np.stack(
        [
            blocks.p * matrix.values[:, matrix.block_slice(j)]
            @ (metric[matrix.block_slice(j), None] * eig.V[matrix.block_slice(j)])
            for j in range(blocks.p)
        ]
    )
    rv = np.eye(blocks.p)
    for j in range(blocks.p):
        for k in range(j + 1, blocks.p):
            rv[j, k] = rv[k, j] = rv_coefficient(blocks.blocks[j], blocks.blocks[k], w)
    return MfaModel(
        blocks=blocks,
        unit_weights=w,
        matrix=matrix,
        partials=tuple(partials),
        block_weights=a,
        column_metric=metric,
        eigen=eig,
        row_coordinates=rows,
        partial_row_coordinates=partial_rows,
        column_coordinates=cols,
        rv=rv,
    )


@dataclass(frozen=True, eq=False)
class Contributions:
    """``cr`` is the share of an axis's eigenvalue due to each point; ``ca``
    the squared cosine of each point with each axis."""

    row_cr: np.ndarray
    row_ca: np.ndarray
    column_cr: np.ndarray
    column_ca: np.ndarray


def _squared_cosines(coords: np.ndarray) -> np.ndarray:
    sq = coords**2
    tot = sq.sum(axis=1, keepdims=True)
    out = np.zeros_like(sq)
    np.divide(sq, tot, out=out, where=tot > 0)
    return out


def contributions(model: MfaModel) -> Contributions:
    ev = model.eigenvalues
    F = model.row_coordinates
    G = model.column_coordinates
    row_cr = model.unit_weights.values[:, None] * F**2 / ev
    column_cr = model.column_metric[:, None] * G**2 / ev
    return Contributions(row_cr, _squared_cosines(F), column_cr, _squared_cosines(G))


@dataclass(frozen=True)
class MomentDiagnostics:
    """``correlations[m, axis, j]`` for moment ``MOMENTS[m]`` and block ``j``."""

    correlations: np.ndarray
    degenerate: np.ndarray
    coordinates: str

    def strongest_moment(self, axis: int, j: int) -> str:
        r = np.abs(self.correlations[:, axis, j])
        return MOMENTS[int(np.argmax(r))]


def moment_axis_diagnostics(
    model: MfaModel,
    summaries: Mapping[str, Sequence[DistributionSummary]],
    coordinates: str = "global",
) -> MomentDiagnostics:
    """Correlate each axis with the moments of each variable's distributions.

    With ``coordinates="partial"`` block ``j``'s moments are compared with the
    partial coordinates of block ``j``; otherwise with the global ones.
    Constant moment series give correlation 0 and a degenerate flag.
    """
    if coordinates not in ("global", "partial"):
        raise DomainError(f"unknown coordinate kind {coordinates!r}")
    w = model.unit_weights.values
    corr = np.zeros((len(MOMENTS), model.rank, model.p))
    flags = np.zeros_like(corr, dtype=bool)
    for j, var in enumerate(model.variables):
        if var not in summaries:
            raise DomainError(f"no summaries for variable {var!r}")
        series = np.array([[getattr(s, m) for m in MOMENTS] for s in summaries[var]])
        if len(series) != model.blocks.n:
            raise DomainError(f"expected {model.blocks.n} summaries for {var!r}")
        axes = model.row_coordinates if coordinates == "global" else model.partial_row_coordinates[j]
        r = _wcorr(series, axes, w)
        bad = np.isnan(r)
        corr[:, :, j] = np.where(bad, 0.0, r)
        flags[:, :, j] = bad
    return MomentDiagnostics(corr, flags, coordinates)

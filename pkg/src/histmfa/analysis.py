"""Glue from a histogram table to a fitted model."""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .dataio import DistributionalTable
from .distributions import DomainError, homogenize, summarize
from .mfa import MfaModel, global_mfa
from .quantiles import BlockSet, build_quantile_table, center_columns, extremes_column_weights


def build_blocks(
    table: DistributionalTable,
    quantiles: int = 20,
    quantiles_for: Mapping[str, int] | None = None,
    extremes: str = "active",
) -> BlockSet:
    overrides = dict(quantiles_for or {})
    unknown = set(overrides) - set(table.variables)
    if unknown:
        raise DomainError(f"quantile override for unknown variable(s) {sorted(unknown)}")
    blocks, weights = [], []
    for var in table.variables:
        K = overrides.get(var, quantiles)
        hists = homogenize(table.column(var), K)
        blocks.append(center_columns(build_quantile_table(var, hists, K)))
        weights.append(extremes_column_weights(K, extremes))
    return BlockSet(tuple(blocks), tuple(weights))


def fit_table(
    table: DistributionalTable,
    quantiles: int = 20,
    quantiles_for: Mapping[str, int] | None = None,
    extremes: str = "active",
) -> MfaModel:
    return global_mfa(build_blocks(table, quantiles, quantiles_for, extremes))


def table_summaries(table: DistributionalTable) -> dict:
    return {v: [summarize(h) for h in table.column(v)] for v in table.variables}


def kurtosis_table(table: DistributionalTable) -> np.ndarray:
    """Fourth standardized moment, units by variables."""
    s = table_summaries(table)
    return np.array([[s[v][i].kurtosis for v in table.variables] for i in range(len(table.units))])

"""Synthetic two-variable microdata: Gaussians of common mean with varying
spread, and right-skewed Beta variates that are shifted and scaled."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SimulationDesign:
    n_units: int = 10
    n_draws: int = 1000
    gauss_mean: float = 10.0
    gauss_sd: tuple[float, float] = (0.1, 1.0)
    beta_shape: tuple[float, float] = (2.0, 5.0)
    beta_shift: tuple[float, float] = (0.0, 10.0)
    beta_scale: tuple[float, float] = (4.0, 10.0)


@dataclass(frozen=True)
class SimulatedData:
    units: list[str]
    gauss_sd: np.ndarray
    beta_shift: np.ndarray
    beta_scale: np.ndarray
    gauss: np.ndarray
    beta: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("unit,variable,value\n")
        for name, draws in (("Gauss", self.gauss), ("Beta", self.beta)):
            for u, row in zip(self.units, draws):
                for x in row:
                    buf.write(f"{u},{name},{float(x)!r}\n")
        return buf.getvalue()


def simulate(seed: int, design: SimulationDesign = SimulationDesign()) -> SimulatedData:
    rng = np.random.default_rng(seed)
    n = design.n_units
    sd = rng.permutation(np.linspace(*design.gauss_sd, n))
    shift = rng.permutation(np.linspace(*design.beta_shift, n))
    scale = rng.permutation(np.linspace(*design.beta_scale, n))
    gauss = design.gauss_mean + sd[:, None] * rng.standard_normal((n, design.n_draws))
    a, b = design.beta_shape
    beta = shift[:, None] + scale[:, None] * rng.beta(a, b, size=(n, design.n_draws))
    units = [f"u{i + 1}" for i in range(n)]
    return SimulatedData(units, sd, shift, scale, gauss, beta)

"""Gaussian z-score bucketing of predicted loads into tariff bands.

Predictions are standardized against the cohort mean and standard
deviation; each band is one standard deviation wide, and band ids are
shifted so the lowest occupied band is 0. Everyone in the same band is
charged the same amount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FairTariffError


class DegenerateDistributionError(FairTariffError):
    """All predictions identical: the z-score bands are undefined."""


@dataclass(frozen=True)
class BandModel:
    """Fitted moments for band assignment."""

    mu: float
    rho: float


@dataclass(frozen=True)
class BandAssignment:
    sample_id: str
    z: float
    band: int

    def __post_init__(self) -> None:
        if self.band < 0:
            raise ValueError(f"band must be non-negative, got {self.band}")


def fit_bands(predictions: Sequence[tuple[str, float]]) -> BandModel:
    """Fit mean and population standard deviation of the predicted loads."""
    if len(predictions) < 2:
        raise ValueError(f"need at least 2 predictions to fit bands, got {len(predictions)}")
    ys = np.asarray([y for _, y in predictions], dtype=float)
    mu = float(np.mean(ys))
    rho = float(np.std(ys))
    if rho == 0.0:
        raise DegenerateDistributionError(
            "all predictions identical; cannot form z-score bands"
        )
    return BandModel(mu=mu, rho=rho)


def assign_band(model: BandModel, y: float) -> int:
    """Raw (possibly negative) band index: floor of the z-score."""
    return math.floor((y - model.mu) / model.rho)


def raw_bands(model: BandModel, ys: Sequence[float]) -> np.ndarray:
    """Vectorized raw band indices for many predictions."""
    z = (np.asarray(ys, dtype=float) - model.mu) / model.rho
    return np.floor(z).astype(np.int64)


def assign_tariffs(predictions: Sequence[tuple[str, float]]) -> list[tuple[str, int]]:
    """Assign a non-negative tariff band id to every prediction.

    Fits the band model on the input, buckets each prediction by its
    z-score, then shifts all bands by the minimum so the cheapest
    occupied band gets id 0. Output order equals input order. One pass
    after the moments, O(n).
    """
    model = fit_bands(predictions)
    bands = raw_bands(model, [y for _, y in predictions])
    bands -= bands.min()
    return [(sid, int(b)) for (sid, _), b in zip(predictions, bands)]

"""Pluggable black-box predictors and factual/counterfactual pair construction.

The fairness engine never looks inside a model; it only needs a function
from (sample, group) to a predicted value. Real deployments export their
model's predictions for both group values to a lookup table; the
seasonal-naive forecaster exists so the pipeline runs end to end without
any external ML.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .bucketing import BandModel, assign_band, fit_bands
from .core import FairTariffError, GroupSpec, PredictionPair, Sample, binarize_group


class MissingPredictionError(FairTariffError):
    """The predictor has no value for a (sample, group) query."""


class Predictor(Protocol):
    def predict(self, sample: Sample, group: int | None = None) -> float: ...


@dataclass(frozen=True)
class TableLookupPredictor:
    """Predictions exported from any external model, keyed by (sample_id, group)."""

    table: Mapping[tuple[str, int], float]

    def predict(self, sample: Sample, group: int | None = None) -> float:
        if group is None:
            rows = [g for g in (0, 1) if (sample.id, g) in self.table]
            if len(rows) != 1:
                raise MissingPredictionError(
                    f"sample {sample.id!r}: pass an explicit group "
                    f"({len(rows)} table rows match)"
                )
            group = rows[0]
        try:
            return self.table[(sample.id, group)]
        except KeyError:
            raise MissingPredictionError(
                f"no prediction for sample {sample.id!r} with group {group}"
            ) from None


@dataclass(frozen=True)
class SeasonalNaivePredictor:
    """Forecast = the observation ``lag`` steps earlier in the feature series.

    With half-hourly load features, lag 48 repeats the same time of the
    previous day. Blind to the protected attribute, so counterfactual
    queries return the factual value.
    """

    lag: int = 48

    def predict(self, sample: Sample, group: int | None = None) -> float:
        series = list(sample.features.values())
        if self.lag <= 0 or len(series) < self.lag:
            raise MissingPredictionError(
                f"sample {sample.id!r}: series of length {len(series)} "
                f"cannot look back {self.lag} steps"
            )
        return series[-self.lag]


def predict(predictor: Predictor, sample: Sample, group_override: int | None = None) -> float:
    """Query a predictor, optionally substituting the protected group."""
    return predictor.predict(sample, group_override)


def predict_pair(
    predictor: Predictor,
    sample: Sample,
    groupspec: GroupSpec,
    model: BandModel,
    offset: int,
) -> PredictionPair:
    """Factual and counterfactual band labels for one sample.

    Both predictions are banded under the same fitted band model and the
    same cohort offset; the model is never refitted for perturbations.
    """
    group = binarize_group(groupspec, sample.protected_raw)
    y_f = assign_band(model, predictor.predict(sample, group)) - offset
    y_cf = assign_band(model, predictor.predict(sample, 1 - group)) - offset
    return PredictionPair(sample_id=sample.id, y_factual=y_f, y_counterfactual=y_cf, group=group)


def build_pairs(
    predictor: Predictor,
    samples: Sequence[Sample],
    groupspec: GroupSpec,
) -> tuple[BandModel, list[PredictionPair]]:
    """Band the whole cohort and pair factual with counterfactual labels.

    The band model is fitted on the factual predictions only. Labels are
    shifted by one shared offset, chosen over factual and counterfactual
    bands together so every label is non-negative; a shared constant
    shift changes neither favorability splits nor label differences.
    """
    groups = [binarize_group(groupspec, s.protected_raw) for s in samples]
    factual = [predictor.predict(s, g) for s, g in zip(samples, groups)]
    counterfactual = [predictor.predict(s, 1 - g) for s, g in zip(samples, groups)]

    model = fit_bands([(s.id, y) for s, y in zip(samples, factual)])
    bands_f = [assign_band(model, y) for y in factual]
    bands_cf = [assign_band(model, y) for y in counterfactual]
    offset = min(min(bands_f), min(bands_cf))

    pairs = [
        PredictionPair(
            sample_id=s.id,
            y_factual=bf - offset,
            y_counterfactual=bcf - offset,
            group=g,
        )
        for s, g, bf, bcf in zip(samples, groups, bands_f, bands_cf)
    ]
    return model, pairs

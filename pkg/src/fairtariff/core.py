"""Shared domain types: samples, group rules, favorability rules, prediction pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

PRIVILEGED = 1
UNPRIVILEGED = 0

FAVORABLE = 1
UNFAVORABLE = 0


class FairTariffError(Exception):
    """Base class for all errors raised by this package."""


class GroupMappingError(FairTariffError):
    """A raw protected-attribute value is not covered by the group rule."""


class UnfittedLabelSpecError(FairTariffError):
    """A LabelSpec was used before its cut value was fitted."""


class UndefinedMetricError(FairTariffError):
    """A group rate or ratio is undefined (empty group or zero/zero)."""


def as_fraction(value) -> Fraction:
    """Exact rational form of a numeric parameter.

    Floats go through their shortest decimal repr, so 0.1 becomes 1/10
    rather than the nearest binary double. Threshold comparisons stay
    exact that way.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def canonical_raw(raw) -> str:
    """Canonical string form of a raw protected value.

    Numeric values are normalized so "1", "1.0" and 1.0 all compare equal;
    anything non-numeric is matched as a plain string.
    """
    if isinstance(raw, bool):
        return str(int(raw))
    try:
        x = float(raw)
    except (TypeError, ValueError):
        return str(raw)
    if math.isfinite(x) and x == int(x):
        return str(int(x))
    return repr(x)


@dataclass(frozen=True)
class Sample:
    """One individual: identity, ordered named features, raw protected value."""

    id: str
    protected_raw: str | float
    features: Mapping[str, float]

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("sample id must be non-empty")
        if not self.features:
            raise ValueError(f"sample {self.id!r}: features must be non-empty")


@dataclass(frozen=True)
class GroupSpec:
    """Binarization rule mapping a raw protected attribute to privileged (1) / unprivileged (0).

    Two kinds are supported:

    * ``threshold-on-numeric``: raw <= threshold maps to 0, raw > threshold to 1
      (an Age rule with threshold 45 puts the young in group 0).
    * ``binary-categorical``: explicit privileged / unprivileged value sets.
    """

    attribute_name: str
    kind: str
    threshold: float | None = None
    privileged_values: frozenset[str] = frozenset()
    unprivileged_values: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.kind == "threshold-on-numeric":
            if self.threshold is None or not math.isfinite(self.threshold):
                raise ValueError("threshold kind requires a finite numeric threshold")
        elif self.kind == "binary-categorical":
            if not self.privileged_values or not self.unprivileged_values:
                raise ValueError("categorical kind requires both value sets")
            overlap = self.privileged_values & self.unprivileged_values
            if overlap:
                raise ValueError(f"values in both groups: {sorted(overlap)}")
        else:
            raise ValueError(f"unknown group kind: {self.kind!r}")

    @classmethod
    def numeric_threshold(cls, attribute_name: str, threshold: float) -> "GroupSpec":
        return cls(attribute_name, "threshold-on-numeric", threshold=float(threshold))

    @classmethod
    def categorical(cls, attribute_name: str, privileged, unprivileged) -> "GroupSpec":
        return cls(
            attribute_name,
            "binary-categorical",
            privileged_values=frozenset(canonical_raw(v) for v in privileged),
            unprivileged_values=frozenset(canonical_raw(v) for v in unprivileged),
        )


def binarize_group(spec: GroupSpec, raw) -> int:
    """Map a raw protected value to 0 (unprivileged) or 1 (privileged).

    Deterministic and total over the values the spec declares; anything
    else raises GroupMappingError naming the offending value.
    """
    if spec.kind == "threshold-on-numeric":
        try:
            x = float(raw)
        except (TypeError, ValueError):
            raise GroupMappingError(
                f"{spec.attribute_name}: non-numeric value {raw!r} for threshold rule"
            ) from None
        return UNPRIVILEGED if x <= spec.threshold else PRIVILEGED
    key = canonical_raw(raw)
    if key in spec.privileged_values:
        return PRIVILEGED
    if key in spec.unprivileged_values:
        return UNPRIVILEGED
    raise GroupMappingError(f"{spec.attribute_name}: value {raw!r} not covered by group rule")


@dataclass(frozen=True)
class LabelSpec:
    """Percentile split of numeric labels into favorable (1) / unfavorable (0).

    The lower ``favorable_fraction`` of the initial label distribution is
    favorable (smaller label = lower tariff band or lower sentence = better).
    The cut is the label of the ceil(fraction * n)-th sample in ascending
    order, so labels equal to the cut are favorable. It is fitted once and
    frozen; mitigation never refits it.
    """

    favorable_fraction: Fraction = Fraction(2, 5)
    cut_value: float | None = None
    strategy: str = "percentile-split"

    def __post_init__(self) -> None:
        frac = as_fraction(self.favorable_fraction)
        object.__setattr__(self, "favorable_fraction", frac)
        if not (0 < frac < 1):
            raise ValueError(f"favorable_fraction must be in (0, 1), got {frac}")

    @property
    def fitted(self) -> bool:
        return self.cut_value is not None

    def fit(self, labels: Sequence[float]) -> "LabelSpec":
        """Return a fitted copy with the cut computed from ``labels``."""
        if self.fitted:
            raise ValueError("LabelSpec is already fitted; cut_value is immutable")
        if not labels:
            raise ValueError("cannot fit LabelSpec on an empty label set")
        ordered = sorted(labels)
        k = math.ceil(self.favorable_fraction * len(ordered))
        return replace(self, cut_value=ordered[k - 1])


def favorability(spec: LabelSpec, label: float) -> int:
    """1 if ``label`` is favorable under the fitted spec, else 0."""
    if not spec.fitted:
        raise UnfittedLabelSpecError("LabelSpec must be fitted before use")
    return FAVORABLE if label <= spec.cut_value else UNFAVORABLE


@dataclass(frozen=True)
class PredictionPair:
    """Factual and counterfactual class labels for one sample.

    The counterfactual label is the model output after perturbing only the
    protected attribute (group flipped), banded under the same band model
    as the factual prediction.
    """

    sample_id: str
    y_factual: int
    y_counterfactual: int
    group: int

    def __post_init__(self) -> None:
        if self.group not in (0, 1):
            raise ValueError(f"group must be 0 or 1, got {self.group}")
        if self.y_factual < 0 or self.y_counterfactual < 0:
            raise ValueError(
                f"sample {self.sample_id!r}: labels must be non-negative "
                f"({self.y_factual}, {self.y_counterfactual})"
            )


@dataclass(frozen=True)
class MitigationConfig:
    """Knobs for a mitigation run."""

    epsilon: float | Fraction = Fraction(1, 10)
    strategy: str = "priority"
    seed: int | None = None
    max_flips: int | None = None

    def __post_init__(self) -> None:
        eps = as_fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if not (0 <= eps < 1):
            raise ValueError(f"epsilon must be in [0, 1), got {eps}")
        if self.strategy not in ("priority", "randomized"):
            raise ValueError(f"unknown strategy: {self.strategy!r}")
        if self.max_flips is not None and self.max_flips < 0:
            raise ValueError("max_flips must be non-negative")

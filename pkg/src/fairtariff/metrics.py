"""Group-fairness measurement: favorable rates per group and Disparate Impact.

Disparate Impact is the ratio of the unprivileged group's favorable rate
to the privileged group's. It is computed as an exact rational so that
threshold comparisons (the usual 0.9 line) never flake on float rounding.
A single-sample flip updates the tally in O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from .core import (
    LabelSpec,
    PredictionPair,
    UndefinedMetricError,
    as_fraction,
    favorability,
)


@dataclass(frozen=True)
class GroupTally:
    """Group sizes and favorable counts for both groups."""

    n_priv: int
    n_unpriv: int
    fav_priv: int
    fav_unpriv: int

    def __post_init__(self) -> None:
        if not (0 <= self.fav_priv <= self.n_priv):
            raise ValueError(
                f"privileged favorable count {self.fav_priv} outside [0, {self.n_priv}]"
            )
        if not (0 <= self.fav_unpriv <= self.n_unpriv):
            raise ValueError(
                f"unprivileged favorable count {self.fav_unpriv} outside [0, {self.n_unpriv}]"
            )

    def size(self, group: int) -> int:
        return self.n_priv if group == 1 else self.n_unpriv

    def favorable(self, group: int) -> int:
        return self.fav_priv if group == 1 else self.fav_unpriv


def tally(pairs: Iterable[PredictionPair], labels: LabelSpec) -> GroupTally:
    """Count favorability of the factual labels per group."""
    n = [0, 0]
    fav = [0, 0]
    for pair in pairs:
        n[pair.group] += 1
        fav[pair.group] += favorability(labels, pair.y_factual)
    if n[0] == 0 or n[1] == 0:
        empty = "unprivileged" if n[0] == 0 else "privileged"
        raise UndefinedMetricError(f"{empty} group is empty; group rates undefined")
    return GroupTally(n_priv=n[1], n_unpriv=n[0], fav_priv=fav[1], fav_unpriv=fav[0])


def disparate_impact(t: GroupTally) -> Fraction | float:
    """Unprivileged favorable rate over privileged favorable rate, exact.

    Returns math.inf when only the privileged rate is zero; raises
    UndefinedMetricError when both rates are zero.
    """
    if t.fav_priv == 0:
        if t.fav_unpriv == 0:
            raise UndefinedMetricError("both favorable rates are zero; DI undefined")
        return math.inf
    return Fraction(t.fav_unpriv * t.n_priv, t.n_unpriv * t.fav_priv)


def apply_flip(t: GroupTally, group: int, old_fav: int, new_fav: int) -> GroupTally:
    """Tally after one sample in ``group`` changes favorability.

    Equals a full re-tally of the flipped dataset; validation surfaces
    any count drift as an invariant violation.
    """
    delta = new_fav - old_fav
    if delta == 0:
        return t
    if group == 1:
        updated = replace(t, fav_priv=t.fav_priv + delta)
    else:
        updated = replace(t, fav_unpriv=t.fav_unpriv + delta)
    return updated


def is_fair(di, epsilon) -> bool:
    """Two-sided check: 1 - epsilon <= di <= 1 / (1 - epsilon)."""
    eps = as_fraction(epsilon)
    lo = 1 - eps
    if di == math.inf:
        return False
    return lo <= di <= 1 / lo

"""Individual bias detection, unfairness scoring, and the two mitigation loops.

A sample is individually biased when its class label changes under
perturbation of the protected attribute alone. The Unfairness Quotient
(uq) is the absolute label difference; larger uq means more injustice
and earlier treatment in the priority order.

Mitigation walks the biased minority samples, replacing each factual
label with its counterfactual and re-checking Disparate Impact after
every flip, until the DI threshold is met, candidates run out, or the
flip cap is hit. The priority strategy orders candidates by decreasing
uq; the randomized baseline uses a seeded uniform shuffle instead.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    LabelSpec,
    MitigationConfig,
    PredictionPair,
    as_fraction,
    favorability,
)
from .metrics import GroupTally, apply_flip, disparate_impact, tally

THRESHOLD_REACHED = "threshold-reached"
CANDIDATES_EXHAUSTED = "candidates-exhausted"
MAX_FLIPS = "max-flips"


@dataclass(frozen=True)
class ScoredSample:
    """A prediction pair with its Unfairness Quotient."""

    pair: PredictionPair
    uq: int

    @property
    def biased(self) -> bool:
        return self.uq > 0


@dataclass(frozen=True)
class FlipRecord:
    sample_id: str
    old_label: int
    new_label: int
    di_after: float


@dataclass(frozen=True)
class MitigationTrace:
    """Ordered log of flips with the DI value after each.

    DI values are recorded in minority orientation (minority favorable
    rate over majority favorable rate, <= 1 at the start). ``elapsed``
    is wall-clock seconds around the mitigation work and is excluded
    from equality so identical runs compare equal.
    """

    flips: tuple[FlipRecord, ...]
    initial_di: float
    final_di: float
    terminated_by: str
    minority: int
    elapsed: float | None = field(default=None, compare=False)

    @property
    def trajectory(self) -> list[float]:
        """DI series starting at the initial value, one point per flip."""
        return [self.initial_di] + [f.di_after for f in self.flips]


def detect_and_score(pairs: Iterable[PredictionPair]) -> list[ScoredSample]:
    """Score every sample; uq > 0 marks it individually biased."""
    return [
        ScoredSample(pair=p, uq=abs(p.y_counterfactual - p.y_factual)) for p in pairs
    ]


def _minority_from_tally(t: GroupTally) -> tuple[int, Fraction]:
    di = disparate_impact(t)
    if di > 1:
        minority = 1
        normalized = Fraction(t.fav_priv * t.n_unpriv, t.n_priv * t.fav_unpriv)
    else:
        minority = 0
        normalized = di
    return minority, normalized


def determine_minority(
    pairs: Sequence[PredictionPair], labels: LabelSpec
) -> tuple[int, Fraction]:
    """The group with the lower favorable rate, and DI normalized to <= 1."""
    return _minority_from_tally(tally(pairs, labels))


def _normalized_di(t: GroupTally, minority: int) -> Fraction:
    # Majority favorable count is fixed during mitigation and nonzero by
    # construction (both rates zero is rejected up front).
    majority = 1 - minority
    return Fraction(
        t.favorable(minority) * t.size(majority),
        t.size(minority) * t.favorable(majority),
    )


def _run(
    scored: Sequence[ScoredSample],
    labels: LabelSpec,
    cfg: MitigationConfig,
    order,
) -> MitigationTrace:
    start = time.perf_counter()
    threshold = 1 - as_fraction(cfg.epsilon)
    t = tally((s.pair for s in scored), labels)
    minority, di = _minority_from_tally(t)
    initial = di

    flips: list[FlipRecord] = []
    if di >= threshold:
        terminated = THRESHOLD_REACHED
    else:
        candidates = [s for s in scored if s.biased and s.pair.group == minority]
        terminated = CANDIDATES_EXHAUSTED
        for s in order(candidates):
            if cfg.max_flips is not None and len(flips) >= cfg.max_flips:
                terminated = MAX_FLIPS
                break
            old, new = s.pair.y_factual, s.pair.y_counterfactual
            t = apply_flip(t, minority, favorability(labels, old), favorability(labels, new))
            di = _normalized_di(t, minority)
            flips.append(FlipRecord(s.pair.sample_id, old, new, float(di)))
            if di >= threshold:
                terminated = THRESHOLD_REACHED
                break

    return MitigationTrace(
        flips=tuple(flips),
        initial_di=float(initial),
        final_di=float(di),
        terminated_by=terminated,
        minority=minority,
        elapsed=time.perf_counter() - start,
    )


def mitigate_priority(
    scored: Sequence[ScoredSample], labels: LabelSpec, cfg: MitigationConfig
) -> MitigationTrace:
    """Flip biased minority samples in decreasing-uq order until fair.

    Ties in uq are broken by ascending sample id so the order is total
    and runs are reproducible. The input list is never mutated; the
    trace carries the new labels.
    """
    if cfg.strategy != "priority":
        raise ValueError(f"config strategy is {cfg.strategy!r}, expected 'priority'")

    def order(candidates: list[ScoredSample]) -> list[ScoredSample]:
        return sorted(candidates, key=lambda s: (-s.uq, s.pair.sample_id))

    return _run(scored, labels, cfg, order)


def mitigate_randomized(
    scored: Sequence[ScoredSample], labels: LabelSpec, cfg: MitigationConfig
) -> MitigationTrace:
    """Baseline: same flip and stop rule, candidate order shuffled by seed."""
    if cfg.strategy != "randomized":
        raise ValueError(f"config strategy is {cfg.strategy!r}, expected 'randomized'")
    if cfg.seed is None:
        raise ValueError("randomized strategy requires a seed")

    def order(candidates: list[ScoredSample]) -> list[ScoredSample]:
        shuffled = list(candidates)
        random.Random(cfg.seed).shuffle(shuffled)
        return shuffled

    return _run(scored, labels, cfg, order)


def mitigate(
    scored: Sequence[ScoredSample], labels: LabelSpec, cfg: MitigationConfig
) -> MitigationTrace:
    """Dispatch on cfg.strategy."""
    if cfg.strategy == "priority":
        return mitigate_priority(scored, labels, cfg)
    return mitigate_randomized(scored, labels, cfg)


def apply_trace(
    pairs: Iterable[PredictionPair], trace: MitigationTrace
) -> dict[str, int]:
    """Final label per sample id after replaying the trace's flips."""
    labels = {p.sample_id: p.y_factual for p in pairs}
    for f in trace.flips:
        labels[f.sample_id] = f.new_label
    return labels

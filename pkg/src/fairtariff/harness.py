"""End-to-end orchestration and the priority-vs-randomized benchmark.

The pipeline chains prediction, banding, favorability fitting, bias
scoring, and mitigation over immutable inputs, so one prepared cohort
can back any number of mitigation runs without cross-contamination.
Timing covers the mitigation loop only; file I/O is the caller's.
"""

from __future__ import annotations

import statistics
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Sequence

from .bucketing import BandModel
from .core import (
    FairTariffError,
    GroupSpec,
    LabelSpec,
    MitigationConfig,
    PredictionPair,
    Sample,
)
from .engine import (
    MitigationTrace,
    ScoredSample,
    apply_trace,
    detect_and_score,
    mitigate,
)
from .predictor import Predictor, build_pairs


@contextmanager
def _stage(name: str):
    # Re-raise with the pipeline stage prepended so a failure deep in a
    # module call names where the pipeline was when it died.
    try:
        yield
    except FairTariffError as e:
        raise type(e)(f"{name}: {e}") from e


@dataclass(frozen=True)
class PipelineRun:
    """Everything one pipeline execution produced, for reports and figures."""

    model: BandModel
    pairs: tuple[PredictionPair, ...]
    labels: LabelSpec
    scored: tuple[ScoredSample, ...]
    trace: MitigationTrace

    def final_labels(self) -> dict[str, int]:
        return apply_trace(self.pairs, self.trace)


def prepare(
    samples: Sequence[Sample],
    predictor: Predictor,
    groupspec: GroupSpec,
    labelspec: LabelSpec,
) -> tuple[BandModel, tuple[PredictionPair, ...], LabelSpec, tuple[ScoredSample, ...]]:
    """Run every stage ahead of mitigation once.

    An unfitted LabelSpec is fitted on the cohort's factual band labels;
    a fitted one is used as handed in.
    """
    with _stage("prediction and banding"):
        model, pairs = build_pairs(predictor, samples, groupspec)
    with _stage("favorability fit"):
        if not labelspec.fitted:
            labelspec = labelspec.fit([p.y_factual for p in pairs])
    with _stage("bias detection"):
        scored = tuple(detect_and_score(pairs))
    return model, tuple(pairs), labelspec, scored


def execute_pipeline(
    samples: Sequence[Sample],
    predictor: Predictor,
    groupspec: GroupSpec,
    labelspec: LabelSpec,
    cfg: MitigationConfig,
) -> PipelineRun:
    model, pairs, labels, scored = prepare(samples, predictor, groupspec, labelspec)
    with _stage("mitigation"):
        trace = mitigate(scored, labels, cfg)
    return PipelineRun(model=model, pairs=pairs, labels=labels, scored=scored, trace=trace)


def run_pipeline(
    samples: Sequence[Sample],
    predictor: Predictor,
    groupspec: GroupSpec,
    labelspec: LabelSpec,
    cfg: MitigationConfig,
) -> MitigationTrace:
    """Full chain from raw samples to a mitigation trace."""
    return execute_pipeline(samples, predictor, groupspec, labelspec, cfg).trace


@dataclass(frozen=True)
class StrategyRun:
    """Flip count, mitigation wall time, and DI trajectory of one run."""

    flips: int
    elapsed: float | None
    trajectory: tuple[float, ...]

    @classmethod
    def from_trace(cls, trace: MitigationTrace) -> "StrategyRun":
        return cls(
            flips=len(trace.flips),
            elapsed=trace.elapsed,
            trajectory=tuple(trace.trajectory),
        )


@dataclass(frozen=True)
class ComparisonReport:
    """Priority strategy benchmarked against seeded randomized baselines."""

    dataset_id: str
    epsilon: float
    priority: StrategyRun
    randomized: tuple[tuple[int, StrategyRun], ...]

    @property
    def mean_randomized_flips(self) -> float:
        return statistics.fmean(run.flips for _, run in self.randomized)

    @property
    def flip_ratio(self) -> float | None:
        """Mean randomized flips per priority flip.

        1.0 when both sides flipped nothing (equally idle); undefined
        when only the priority side flipped nothing.
        """
        mean = self.mean_randomized_flips
        if self.priority.flips == 0:
            return 1.0 if mean == 0 else None
        return mean / self.priority.flips

    def without_timing(self) -> "ComparisonReport":
        """Copy with all wall times dropped, for byte-stable output."""
        return replace(
            self,
            priority=replace(self.priority, elapsed=None),
            randomized=tuple(
                (seed, replace(run, elapsed=None)) for seed, run in self.randomized
            ),
        )


def compare(
    samples: Sequence[Sample],
    predictor: Predictor,
    groupspec: GroupSpec,
    labelspec: LabelSpec,
    epsilon,
    seeds: Sequence[int],
    dataset_id: str = "cohort",
    max_flips: int | None = None,
) -> ComparisonReport:
    """One priority run plus one randomized run per seed, identical inputs.

    Prepared inputs are immutable, so every run starts from the same
    initial DI and the trajectories are directly comparable.
    """
    if not seeds:
        raise ValueError("compare needs at least one randomized seed")
    _, _, labels, scored = prepare(samples, predictor, groupspec, labelspec)

    with _stage("mitigation"):
        priority = mitigate(
            scored,
            labels,
            MitigationConfig(epsilon=epsilon, strategy="priority", max_flips=max_flips),
        )
        randomized = tuple(
            (
                seed,
                StrategyRun.from_trace(
                    mitigate(
                        scored,
                        labels,
                        MitigationConfig(
                            epsilon=epsilon,
                            strategy="randomized",
                            seed=seed,
                            max_flips=max_flips,
                        ),
                    )
                ),
            )
            for seed in seeds
        )
    return ComparisonReport(
        dataset_id=dataset_id,
        epsilon=float(epsilon),
        priority=StrategyRun.from_trace(priority),
        randomized=randomized,
    )

"""Figure rendering for traces, reports, and band distributions.

Everything here writes PNG files and returns the path written. The Agg
backend is forced so rendering works headless; no figure is ever shown.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import MitigationTrace
from .harness import ComparisonReport

_DPI = 150


def _save(fig, out_path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return out_path


def di_trajectory(trace: MitigationTrace, epsilon: float, out_path) -> Path:
    """Normalized DI after each flip of a single run, with the fair threshold."""
    fig, ax = plt.subplots(figsize=(7, 4))
    traj = trace.trajectory
    ax.plot(range(len(traj)), traj, marker="o", markersize=3, color="tab:blue")
    ax.axhline(1 - epsilon, color="tab:red", linestyle="--", linewidth=1,
               label=f"threshold {1 - epsilon:g}")
    ax.set_xlabel("flips applied")
    ax.set_ylabel("disparate impact")
    ax.set_title(f"DI trajectory ({trace.terminated_by}, {len(trace.flips)} flips)")
    ax.legend(loc="lower right")
    ax.grid(alpha=0.3)
    return _save(fig, out_path)


def di_trajectories(report: ComparisonReport, out_path) -> Path:
    """Priority trajectory against every randomized baseline trajectory."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, (seed, run) in enumerate(report.randomized):
        ax.plot(
            range(len(run.trajectory)),
            run.trajectory,
            color="0.7",
            linewidth=0.8,
            label="randomized" if i == 0 else None,
        )
    traj = report.priority.trajectory
    ax.plot(range(len(traj)), traj, color="tab:blue", linewidth=2, label="priority")
    ax.axhline(1 - report.epsilon, color="tab:red", linestyle="--", linewidth=1,
               label=f"threshold {1 - report.epsilon:g}")
    ax.set_xlabel("flips applied")
    ax.set_ylabel("disparate impact")
    ax.set_title(f"DI trajectories: {report.dataset_id}")
    ax.legend(loc="lower right")
    ax.grid(alpha=0.3)
    return _save(fig, out_path)


def flip_counts(report: ComparisonReport, out_path) -> Path:
    """Flip counts per randomized seed next to the priority count."""
    fig, ax = plt.subplots(figsize=(7, 4))
    seeds = [str(seed) for seed, _ in report.randomized]
    counts = [run.flips for _, run in report.randomized]
    ax.bar(seeds, counts, color="0.7", label="randomized")
    ax.axhline(report.priority.flips, color="tab:blue", linewidth=2,
               label=f"priority ({report.priority.flips})")
    ax.axhline(report.mean_randomized_flips, color="0.4", linestyle=":",
               label=f"randomized mean ({report.mean_randomized_flips:.1f})")
    ax.set_xlabel("randomized seed")
    ax.set_ylabel("labels flipped")
    ax.set_title(f"Flip counts: {report.dataset_id}")
    ax.legend(loc="best")
    return _save(fig, out_path)


def mitigation_time(report: ComparisonReport, out_path) -> Path:
    """Mitigation wall time per run; needs a report that kept timing."""
    timed = [(seed, run) for seed, run in report.randomized if run.elapsed is not None]
    if report.priority.elapsed is None or not timed:
        raise ValueError("report carries no timing; rerun with timing enabled")
    fig, ax = plt.subplots(figsize=(7, 4))
    seeds = [str(seed) for seed, _ in timed]
    times = [run.elapsed * 1000 for _, run in timed]
    ax.bar(seeds, times, color="0.7", label="randomized")
    ax.axhline(report.priority.elapsed * 1000, color="tab:blue", linewidth=2,
               label="priority")
    ax.set_xlabel("randomized seed")
    ax.set_ylabel("mitigation time (ms)")
    ax.set_title(f"Mitigation wall time: {report.dataset_id}")
    ax.legend(loc="best")
    return _save(fig, out_path)


def band_distribution(
    before: Sequence[int], after: Sequence[int] | None, out_path
) -> Path:
    """Histogram of band labels, optionally before vs after mitigation."""
    fig, ax = plt.subplots(figsize=(7, 4))
    lo = min(before if after is None else [*before, *after])
    hi = max(before if after is None else [*before, *after])
    bands = range(lo, hi + 1)
    counts_before = Counter(before)
    width = 0.4 if after is not None else 0.8
    ax.bar(
        [b - (width / 2 if after is not None else 0) for b in bands],
        [counts_before.get(b, 0) for b in bands],
        width=width,
        color="0.6",
        label="before",
    )
    if after is not None:
        counts_after = Counter(after)
        ax.bar(
            [b + width / 2 for b in bands],
            [counts_after.get(b, 0) for b in bands],
            width=width,
            color="tab:blue",
            label="after",
        )
    ax.set_xticks(list(bands))
    ax.set_xlabel("tariff band")
    ax.set_ylabel("samples")
    ax.set_title("Band distribution")
    ax.legend(loc="best")
    return _save(fig, out_path)

"""CSV ingestion, synthetic biased-cohort generation, and JSON serialization.

File contracts are bit-exact so golden tests stay stable: CSV is UTF-8
with a header, LF line endings and ``.`` decimals; JSON key order is
fixed. The synthetic generator stands in for license-restricted consumer
datasets and records exactly which samples it biased.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, Sequence

from .core import FairTariffError, Sample
from .engine import FlipRecord, MitigationTrace
from .harness import ComparisonReport, StrategyRun
from .predictor import TableLookupPredictor


class ParseError(FairTariffError):
    """Malformed input file; the message carries the line number."""


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for a synthetic cohort with known ground truth.

    Base loads are Gaussian; the default moments match a typical
    residential smart-meter cohort (mean 32.24 kWh, std 9.73 kWh). A
    ``bias_fraction`` share of the unprivileged samples get
    ``bias_shift`` kWh added to their factual prediction, while their
    counterfactual (group-flipped) prediction stays at the base value,
    so perturbing the group changes the prediction for exactly those
    samples.
    """

    n: int
    seed: int
    load_mean: float = 32.24
    load_std: float = 9.73
    bias_fraction: float = 0.3
    bias_shift: float | None = None
    group_balance: float = 0.5

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("cohort size must be at least 1")
        if not (0 <= self.bias_fraction <= 1):
            raise ValueError("bias_fraction must be in [0, 1]")
        if self.load_std <= 0:
            raise ValueError("load_std must be positive")
        if not (0 < self.group_balance < 1):
            raise ValueError("group_balance must be in (0, 1)")

    @property
    def resolved_bias_shift(self) -> float:
        return 2 * self.load_std if self.bias_shift is None else self.bias_shift


def generate(
    spec: SyntheticSpec,
) -> tuple[list[Sample], TableLookupPredictor, set[str]]:
    """Seeded cohort of samples, a lookup table, and the biased-id ground truth.

    Reproducible by construction: a Mersenne Twister stream seeded with
    ``spec.seed`` is consumed in a fixed order per sample (group uniform,
    age uniform, load uniform, bias uniform). The load uniform is the
    53-bit midpoint draw (getrandbits(53) + 0.5) / 2**53, strictly inside
    (0, 1), pushed through the Gaussian inverse CDF. Ages are uniform on
    [18, 45) for the unprivileged (young) and (45, 90] for the privileged.
    """
    rng = random.Random(spec.seed)
    load_dist = NormalDist(spec.load_mean, spec.load_std)
    shift = spec.resolved_bias_shift
    width = max(4, len(str(spec.n - 1)))

    samples: list[Sample] = []
    table: dict[tuple[str, int], float] = {}
    truth: set[str] = set()
    for i in range(spec.n):
        sid = f"s{i:0{width}d}"
        group = 1 if rng.random() < spec.group_balance else 0
        u_age = rng.random()
        age = 90.0 - 45.0 * u_age if group == 1 else 18.0 + 27.0 * u_age
        u_load = (rng.getrandbits(53) + 0.5) / 2.0**53
        base = load_dist.inv_cdf(u_load)
        biased = rng.random() < spec.bias_fraction and group == 0
        factual = base + shift if biased else base
        counterfactual = base if biased else factual

        samples.append(Sample(id=sid, protected_raw=age, features={"avg_daily_kwh": factual}))
        table[(sid, group)] = factual
        table[(sid, 1 - group)] = counterfactual
        if biased:
            truth.add(sid)
    return samples, TableLookupPredictor(table), truth


def _open_read(path):
    try:
        return open(path, encoding="utf-8", newline="")
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror or e}") from e


def read_samples(path) -> list[Sample]:
    """Parse a samples CSV: ``sample_id,protected_raw,<feature columns...>``."""
    with _open_read(path) as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        if header[:2] != ["sample_id", "protected_raw"] or len(header) < 3:
            raise ParseError(
                f"{path}, line 1: header must start with "
                f"'sample_id,protected_raw' followed by at least one feature column"
            )
        feature_names = header[2:]
        samples = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            sid = row[0]
            if sid in seen:
                raise ParseError(f"{path}, line {lineno}: duplicate sample_id {sid!r}")
            seen.add(sid)
            raw: str | float = row[1]
            try:
                raw = float(row[1])
            except ValueError:
                pass
            try:
                features = {
                    name: float(value) for name, value in zip(feature_names, row[2:])
                }
            except ValueError as e:
                raise ParseError(f"{path}, line {lineno}: {e}") from None
            samples.append(Sample(id=sid, protected_raw=raw, features=features))
    if not samples:
        raise ParseError(f"{path}: no data rows")
    return samples


def write_samples(samples: Sequence[Sample], path) -> None:
    feature_names = list(samples[0].features)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["sample_id", "protected_raw"] + feature_names)
        for s in samples:
            if list(s.features) != feature_names:
                raise ValueError(f"sample {s.id!r} has mismatched feature names")
            writer.writerow(
                [s.id, s.protected_raw] + [s.features[n] for n in feature_names]
            )


LOOKUP_HEADER = ["sample_id", "group", "prediction"]


def read_lookup(path) -> TableLookupPredictor:
    """Parse a lookup CSV: ``sample_id,group,prediction`` with group in {0, 1}."""
    with _open_read(path) as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        if header != LOOKUP_HEADER:
            missing = [c for c in LOOKUP_HEADER if c not in header]
            if missing:
                raise ParseError(f"{path}, line 1: missing required column {missing[0]!r}")
            unknown = [c for c in header if c not in LOOKUP_HEADER]
            raise ParseError(f"{path}, line 1: unknown column {unknown[0]!r}")
        table: dict[tuple[str, int], float] = {}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError(f"{path}, line {lineno}: expected 3 fields, got {len(row)}")
            sid, group_s, pred_s = row
            if group_s not in ("0", "1"):
                raise ParseError(f"{path}, line {lineno}: group must be 0 or 1, got {group_s!r}")
            try:
                pred = float(pred_s)
            except ValueError:
                raise ParseError(
                    f"{path}, line {lineno}: prediction {pred_s!r} is not a number"
                ) from None
            key = (sid, int(group_s))
            if key in table:
                raise ParseError(f"{path}, line {lineno}: duplicate row for {key}")
            table[key] = pred
    if not table:
        raise ParseError(f"{path}: no data rows")
    return TableLookupPredictor(table)


def write_lookup(lookup: TableLookupPredictor, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(LOOKUP_HEADER)
        for (sid, group), pred in lookup.table.items():
            writer.writerow([sid, group, pred])


def _elapsed_ms(elapsed_s: float | None) -> float | None:
    return None if elapsed_s is None else elapsed_s * 1000.0


def trace_to_dict(trace: MitigationTrace) -> dict:
    """Trace as a JSON-ready dict; key order is part of the file contract."""
    return {
        "initial_di": trace.initial_di,
        "final_di": trace.final_di,
        "minority": trace.minority,
        "terminated_by": trace.terminated_by,
        "elapsed_ms": _elapsed_ms(trace.elapsed),
        "flips": [
            {
                "sample_id": f.sample_id,
                "old_label": f.old_label,
                "new_label": f.new_label,
                "di_after": f.di_after,
            }
            for f in trace.flips
        ],
    }


def dump_json(obj: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(obj, f, indent=2, allow_nan=False)
        f.write("\n")


def write_trace(trace: MitigationTrace, path) -> None:
    dump_json(trace_to_dict(trace), path)


_TRACE_KEYS = ["initial_di", "final_di", "minority", "terminated_by", "elapsed_ms", "flips"]
_FLIP_KEYS = ["sample_id", "old_label", "new_label", "di_after"]


def _check_keys(obj: dict, expected: list[str], path, what: str) -> None:
    unknown = [k for k in obj if k not in expected]
    if unknown:
        raise ParseError(f"{path}: unknown {what} key {unknown[0]!r}")
    missing = [k for k in expected if k not in obj]
    if missing:
        raise ParseError(f"{path}: missing {what} key {missing[0]!r}")


def read_trace(path) -> MitigationTrace:
    with _open_read(path) as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON ({e})") from None
    _check_keys(obj, _TRACE_KEYS, path, "trace")
    flips = []
    for entry in obj["flips"]:
        _check_keys(entry, _FLIP_KEYS, path, "flip")
        flips.append(
            FlipRecord(
                sample_id=entry["sample_id"],
                old_label=entry["old_label"],
                new_label=entry["new_label"],
                di_after=entry["di_after"],
            )
        )
    elapsed_ms = obj["elapsed_ms"]
    return MitigationTrace(
        flips=tuple(flips),
        initial_di=obj["initial_di"],
        final_di=obj["final_di"],
        terminated_by=obj["terminated_by"],
        minority=obj["minority"],
        elapsed=None if elapsed_ms is None else elapsed_ms / 1000.0,
    )


def report_to_dict(report: ComparisonReport) -> dict:
    def run_dict(run: StrategyRun, seed: int | None = None) -> dict:
        d: dict = {} if seed is None else {"seed": seed}
        d.update(
            {
                "flips": run.flips,
                "elapsed_ms": _elapsed_ms(run.elapsed),
                "trajectory": list(run.trajectory),
            }
        )
        return d

    return {
        "dataset_id": report.dataset_id,
        "epsilon": report.epsilon,
        "priority": run_dict(report.priority),
        "randomized": [run_dict(run, seed) for seed, run in report.randomized],
        "summary": {
            "mean_randomized_flips": report.mean_randomized_flips,
            "flip_ratio": report.flip_ratio,
        },
    }


def write_report(report: ComparisonReport, path) -> None:
    dump_json(report_to_dict(report), path)


_REPORT_KEYS = ["dataset_id", "epsilon", "priority", "randomized", "summary"]
_RUN_KEYS = ["flips", "elapsed_ms", "trajectory"]


def read_report(path) -> ComparisonReport:
    with _open_read(path) as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON ({e})") from None
    _check_keys(obj, _REPORT_KEYS, path, "report")

    def parse_run(entry: dict, with_seed: bool) -> tuple:
        expected = (["seed"] + _RUN_KEYS) if with_seed else _RUN_KEYS
        _check_keys(entry, expected, path, "run")
        elapsed_ms = entry["elapsed_ms"]
        run = StrategyRun(
            flips=entry["flips"],
            elapsed=None if elapsed_ms is None else elapsed_ms / 1000.0,
            trajectory=tuple(entry["trajectory"]),
        )
        return (entry["seed"], run) if with_seed else run

    _check_keys(obj["summary"], ["mean_randomized_flips", "flip_ratio"], path, "summary")
    return ComparisonReport(
        dataset_id=obj["dataset_id"],
        epsilon=obj["epsilon"],
        priority=parse_run(obj["priority"], with_seed=False),
        randomized=tuple(parse_run(e, with_seed=True) for e in obj["randomized"]),
    )


def write_trajectory_csv(rows: Iterable[tuple], path, header: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_truth(truth: set[str], path) -> None:
    dump_json({"biased_sample_ids": sorted(truth)}, path)


def read_truth(path) -> set[str]:
    with _open_read(path) as f:
        obj = json.load(f)
    _check_keys(obj, ["biased_sample_ids"], path, "truth")
    return set(obj["biased_sample_ids"])


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p

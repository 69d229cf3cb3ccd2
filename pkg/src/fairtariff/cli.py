"""Command-line front end.

Subcommands: generate (synthetic cohort), tariff (band allotment only),
audit (fairness report, no mitigation), mitigate (one strategy),
compare (priority vs randomized benchmark).

Exit codes: 0 success, 2 input or parse error, 3 undefined metric
(an empty group or a zero favorable rate on both sides), 4 threshold
unreachable under --strict. Machine output goes to --out or stdout;
progress notes go to stderr.

Timing is omitted from emitted JSON unless --timing is given, so
identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import dataio, plotting
from .bucketing import assign_tariffs
from .core import (
    FairTariffError,
    GroupSpec,
    LabelSpec,
    MitigationConfig,
    UndefinedMetricError,
    binarize_group,
)
from .engine import CANDIDATES_EXHAUSTED, detect_and_score
from .harness import compare, execute_pipeline, prepare
from .metrics import disparate_impact, is_fair, tally

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNDEFINED_METRIC = 3
EXIT_UNREACHABLE = 4


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (0 < value < 1):
        raise argparse.ArgumentTypeError(f"must be strictly between 0 and 1: {text}")
    return value


def _seed_list(text: str) -> list[int]:
    """Either a comma list ('3,5,9') or an inclusive range ('1..20')."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            seeds = list(range(int(lo), int(hi) + 1))
        else:
            seeds = [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list: {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("need at least one seed")
    return seeds


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _emit_json(obj: dict, out: str | None) -> None:
    if out is None:
        print(json.dumps(obj, indent=2, allow_nan=False))
    else:
        dataio.dump_json(obj, out)
        _note(f"wrote {out}")


def _load_inputs(args):
    samples = dataio.read_samples(args.samples)
    lookup = dataio.read_lookup(args.lookup)
    groupspec = GroupSpec.numeric_threshold(args.group_attr, args.group_threshold)
    return samples, lookup, groupspec


def _json_di(di) -> float | None:
    # Infinite DI (favorable labels only on the unprivileged side) has no
    # JSON representation; null stands in for it.
    return None if math.isinf(di) else float(di)


def cmd_generate(args) -> int:
    spec = dataio.SyntheticSpec(
        n=args.n,
        seed=args.seed,
        load_mean=args.load_mean,
        load_std=args.load_std,
        bias_fraction=args.bias_fraction,
        bias_shift=args.bias_shift,
        group_balance=args.group_balance,
    )
    samples, lookup, truth = dataio.generate(spec)
    out = dataio.ensure_dir(args.out)
    dataio.write_samples(samples, out / "samples.csv")
    dataio.write_lookup(lookup, out / "lookup.csv")
    dataio.write_truth(truth, out / "truth.json")
    _note(f"wrote {out / 'samples.csv'}, {out / 'lookup.csv'}, {out / 'truth.json'}")
    _note(f"{len(samples)} samples, {len(truth)} biased")
    return EXIT_OK


def cmd_tariff(args) -> int:
    samples, lookup, groupspec = _load_inputs(args)
    predictions = [
        (s.id, lookup.predict(s, binarize_group(groupspec, s.protected_raw)))
        for s in samples
    ]
    bands = assign_tariffs(predictions)
    if args.out is None:
        for sid, band in bands:
            print(f"{sid},{band}")
    else:
        dataio.write_trajectory_csv(bands, args.out, header=["sample_id", "band"])
        _note(f"wrote {args.out}")
    if args.figures:
        path = plotting.band_distribution(
            [band for _, band in bands], None, Path(args.figures) / "band_distribution.png"
        )
        _note(f"wrote {path}")
    return EXIT_OK


def cmd_audit(args) -> int:
    samples, lookup, groupspec = _load_inputs(args)
    labelspec = LabelSpec(favorable_fraction=args.favorable_fraction)
    _, pairs, labels, scored = prepare(samples, lookup, groupspec, labelspec)

    t = tally(pairs, labels)
    di = disparate_impact(t)
    biased = sorted(
        (s for s in scored if s.biased), key=lambda s: (-s.uq, s.pair.sample_id)
    )
    report = {
        "dataset_id": Path(args.samples).stem,
        "epsilon": float(args.epsilon),
        "n": len(pairs),
        "counts": {
            "n_priv": t.n_priv,
            "n_unpriv": t.n_unpriv,
            "fav_priv": t.fav_priv,
            "fav_unpriv": t.fav_unpriv,
        },
        "disparate_impact": _json_di(di),
        "fair": is_fair(di, args.epsilon),
        "cut_value": labels.cut_value,
        "biased": [
            {"sample_id": s.pair.sample_id, "group": s.pair.group, "uq": s.uq}
            for s in biased
        ],
    }
    _emit_json(report, args.out)
    if args.figures:
        path = plotting.band_distribution(
            [p.y_factual for p in pairs], None, Path(args.figures) / "band_distribution.png"
        )
        _note(f"wrote {path}")
    return EXIT_OK


def cmd_mitigate(args) -> int:
    samples, lookup, groupspec = _load_inputs(args)
    labelspec = LabelSpec(favorable_fraction=args.favorable_fraction)
    cfg = MitigationConfig(
        epsilon=args.epsilon,
        strategy=args.strategy,
        seed=args.seed,
        max_flips=args.max_flips,
    )
    run = execute_pipeline(samples, lookup, groupspec, labelspec, cfg)
    trace = run.trace if args.timing else replace(run.trace, elapsed=None)

    _emit_json(dataio.trace_to_dict(trace), args.out)
    _note(
        f"{trace.terminated_by} after {len(trace.flips)} flips, "
        f"DI {trace.initial_di:.4f} -> {trace.final_di:.4f}"
    )
    if args.trajectory_csv:
        dataio.write_trajectory_csv(
            list(enumerate(trace.trajectory)), args.trajectory_csv, header=["flip_index", "di"]
        )
        _note(f"wrote {args.trajectory_csv}")
    if args.figures:
        figdir = Path(args.figures)
        paths = [
            plotting.di_trajectory(trace, float(args.epsilon), figdir / "di_trajectory.png"),
            plotting.band_distribution(
                [p.y_factual for p in run.pairs],
                list(run.final_labels().values()),
                figdir / "band_distribution.png",
            ),
        ]
        for path in paths:
            _note(f"wrote {path}")
    if args.strict and trace.terminated_by == CANDIDATES_EXHAUSTED:
        _note("threshold unreachable: candidates exhausted")
        return EXIT_UNREACHABLE
    return EXIT_OK


def cmd_compare(args) -> int:
    samples, lookup, groupspec = _load_inputs(args)
    labelspec = LabelSpec(favorable_fraction=args.favorable_fraction)
    report = compare(
        samples,
        lookup,
        groupspec,
        labelspec,
        epsilon=args.epsilon,
        seeds=args.seeds,
        dataset_id=Path(args.samples).stem,
    )
    emitted = report if args.timing else report.without_timing()

    _emit_json(dataio.report_to_dict(emitted), args.out)
    _note(
        f"priority {report.priority.flips} flips vs randomized mean "
        f"{report.mean_randomized_flips:.1f} over {len(report.randomized)} seeds"
    )
    if args.trajectory_csv:
        dataio.write_trajectory_csv(
            list(enumerate(report.priority.trajectory)),
            args.trajectory_csv,
            header=["flip_index", "di"],
        )
        _note(f"wrote {args.trajectory_csv}")
    if args.figures:
        figdir = Path(args.figures)
        paths = [
            plotting.di_trajectories(emitted, figdir / "di_trajectories.png"),
            plotting.flip_counts(emitted, figdir / "flip_counts.png"),
        ]
        if args.timing:
            paths.append(plotting.mitigation_time(report, figdir / "mitigation_time.png"))
        for path in paths:
            _note(f"wrote {path}")
    threshold = 1 - args.epsilon
    if args.strict and report.priority.trajectory[-1] < threshold:
        _note("threshold unreachable: candidates exhausted")
        return EXIT_UNREACHABLE
    return EXIT_OK


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", required=True, help="samples CSV path")
    p.add_argument("--lookup", required=True, help="prediction lookup CSV path")
    p.add_argument("--group-attr", default="age", help="protected attribute name")
    p.add_argument(
        "--group-threshold",
        type=float,
        default=45.0,
        help="values <= threshold are unprivileged (default 45)",
    )


def _add_fairness_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--favorable-fraction",
        type=_fraction,
        default=Fraction("0.40"),
        help="share of lowest labels counted favorable (default 0.40)",
    )
    p.add_argument(
        "--epsilon",
        type=_fraction,
        default=Fraction("0.1"),
        help="fairness slack; fair means DI >= 1 - epsilon (default 0.1)",
    )


def _add_report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--timing", action="store_true", help="include wall times in output")
    p.add_argument(
        "--trajectory-csv", default=None, help="also write flip_index,di rows here"
    )
    p.add_argument(
        "--figures", default=None, metavar="DIR", help="render PNG figures into DIR"
    )
    p.add_argument(
        "--strict",
        action="store_true",
        help="exit 4 if the threshold is unreachable (candidates exhausted)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairtariff",
        description="Post-processing fairness engine for banded predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic biased cohort")
    p.add_argument("--n", type=int, required=True, help="cohort size")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--load-mean", type=float, default=32.24)
    p.add_argument("--load-std", type=float, default=9.73)
    p.add_argument("--bias-fraction", type=float, default=0.3)
    p.add_argument("--bias-shift", type=float, default=None,
                   help="kWh added to biased factual predictions (default 2*load_std)")
    p.add_argument("--group-balance", type=float, default=0.5)
    p.add_argument("--out", required=True, metavar="DIR",
                   help="directory for samples.csv, lookup.csv, truth.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("tariff", help="band allotment only, no fairness pass")
    _add_io_flags(p)
    p.add_argument("--out", default=None, help="bands CSV path (default: stdout)")
    p.add_argument("--figures", default=None, metavar="DIR",
                   help="render PNG figures into DIR")
    p.set_defaults(func=cmd_tariff)

    p = sub.add_parser("audit", help="DI and individual-bias report, no mitigation")
    _add_io_flags(p)
    _add_fairness_flags(p)
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p.add_argument("--figures", default=None, metavar="DIR",
                   help="render PNG figures into DIR")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("mitigate", help="run one mitigation strategy")
    _add_io_flags(p)
    _add_fairness_flags(p)
    p.add_argument("--strategy", choices=["priority", "randomized"], default="priority")
    p.add_argument("--seed", type=int, default=None,
                   help="candidate-order seed (randomized strategy)")
    p.add_argument("--max-flips", type=int, default=None, help="flip budget")
    _add_report_flags(p)
    p.set_defaults(func=cmd_mitigate)

    p = sub.add_parser("compare", help="benchmark priority against randomized")
    _add_io_flags(p)
    _add_fairness_flags(p)
    p.add_argument("--seeds", type=_seed_list, default=list(range(1, 21)),
                   help="randomized seeds, '3,5,9' or '1..20' (default 1..20)")
    _add_report_flags(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except dataio.ParseError as e:
        _note(f"error: {e}")
        return EXIT_INPUT
    except UndefinedMetricError as e:
        _note(f"error: {e}")
        return EXIT_UNDEFINED_METRIC
    except FairTariffError as e:
        _note(f"error: {e}")
        return EXIT_INPUT
    except (ValueError, OSError) as e:
        _note(f"error: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

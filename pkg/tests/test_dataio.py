import json
import time
from fractions import Fraction

import pytest

from fairtariff import (
    ComparisonReport,
    FlipRecord,
    MitigationTrace,
    ParseError,
    SyntheticSpec,
    compare,
    detect_and_score,
    generate,
    read_lookup,
    read_report,
    read_samples,
    read_trace,
    write_lookup,
    write_report,
    write_samples,
    write_trace,
)
from fairtariff.core import LabelSpec, Sample, binarize_group
from fairtariff.dataio import (
    read_truth,
    write_trajectory_csv,
    write_truth,
)
from fairtariff.predictor import build_pairs


class TestSyntheticSpec:
    def test_defaults(self):
        spec = SyntheticSpec(n=100, seed=1)
        assert spec.load_mean == 32.24
        assert spec.load_std == 9.73
        assert spec.bias_fraction == 0.3
        assert spec.group_balance == 0.5
        assert spec.resolved_bias_shift == 2 * 9.73

    def test_explicit_shift_wins(self):
        assert SyntheticSpec(n=10, seed=1, bias_shift=5.0).resolved_bias_shift == 5.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 0},
            {"n": 10, "bias_fraction": 1.5},
            {"n": 10, "bias_fraction": -0.1},
            {"n": 10, "load_std": 0.0},
            {"n": 10, "group_balance": 0.0},
            {"n": 10, "group_balance": 1.0},
        ],
    )
    def test_rejects_bad_knobs(self, kwargs):
        with pytest.raises(ValueError):
            SyntheticSpec(seed=1, **kwargs)


class TestGenerate:
    def test_deterministic_objects(self):
        spec = SyntheticSpec(n=80, seed=13)
        s1, p1, t1 = generate(spec)
        s2, p2, t2 = generate(spec)
        assert s1 == s2
        assert p1.table == p2.table
        assert t1 == t2

    def test_deterministic_files(self, tmp_path):
        spec = SyntheticSpec(n=40, seed=13)
        for run in ("a", "b"):
            samples, pred, truth = generate(spec)
            write_samples(samples, tmp_path / f"{run}_samples.csv")
            write_lookup(pred, tmp_path / f"{run}_lookup.csv")
            write_truth(truth, tmp_path / f"{run}_truth.json")
        for name in ("samples.csv", "lookup.csv", "truth.json"):
            assert (tmp_path / f"a_{name}").read_bytes() == (tmp_path / f"b_{name}").read_bytes()

    def test_sample_id_width(self):
        samples, _, _ = generate(SyntheticSpec(n=2, seed=1))
        assert [s.id for s in samples] == ["s0000", "s0001"]
        samples, _, _ = generate(SyntheticSpec(n=3, seed=1))
        assert samples[-1].id == "s0002"

    def test_truth_marks_exactly_the_divergent_rows(self):
        _, pred, truth = generate(SyntheticSpec(n=300, seed=11))
        sids = {sid for sid, _ in pred.table}
        divergent = {sid for sid in sids if pred.table[(sid, 0)] != pred.table[(sid, 1)]}
        assert truth == divergent

    def test_truth_is_young_only(self, age_rule):
        samples, _, truth = generate(SyntheticSpec(n=300, seed=11))
        by_id = {s.id: s for s in samples}
        assert all(binarize_group(age_rule, by_id[sid].protected_raw) == 0 for sid in truth)

    def test_ages_respect_group_split(self, age_rule):
        samples, pred, _ = generate(SyntheticSpec(n=500, seed=2))
        for s in samples:
            g = binarize_group(age_rule, s.protected_raw)
            if g == 0:
                assert 18.0 <= s.protected_raw < 45.0
            else:
                assert 45.0 < s.protected_raw <= 90.0
            # the factual feature equals the factual table row
            assert s.features["avg_daily_kwh"] == pred.table[(s.id, g)]

    def test_zero_bias_fraction_gives_clean_cohort(self, age_rule):
        samples, pred, truth = generate(SyntheticSpec(n=50, seed=5, bias_fraction=0.0))
        assert truth == set()
        _, pairs = build_pairs(pred, samples, age_rule)
        assert all(s.uq == 0 for s in detect_and_score(pairs))

    def test_detected_set_equals_truth_at_default_shift(self, age_rule):
        """The 2-sigma shift always spans at least one band width."""
        samples, pred, truth = generate(SyntheticSpec(n=200, seed=7))
        _, pairs = build_pairs(pred, samples, age_rule)
        flagged = {s.pair.sample_id for s in detect_and_score(pairs) if s.uq >= 1}
        assert flagged == truth
        n_unpriv = sum(1 for s in samples if binarize_group(age_rule, s.protected_raw) == 0)
        assert 0.15 * n_unpriv <= len(truth) <= 0.45 * n_unpriv


class TestSamplesCsv:
    def test_round_trip_exact(self, tmp_path):
        samples, _, _ = generate(SyntheticSpec(n=30, seed=4))
        path = tmp_path / "samples.csv"
        write_samples(samples, path)
        assert read_samples(path) == samples

    def test_non_numeric_protected_stays_string(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("sample_id,protected_raw,kwh\na1,Male,30.5\n")
        (sample,) = read_samples(path)
        assert sample.protected_raw == "Male"
        assert sample.features == {"kwh": 30.5}

    def test_numeric_protected_parses_to_float(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("sample_id,protected_raw,kwh\na1,44,30.5\n")
        (sample,) = read_samples(path)
        assert sample.protected_raw == 44.0

    def test_lf_endings(self, tmp_path):
        samples, _, _ = generate(SyntheticSpec(n=5, seed=4))
        path = tmp_path / "samples.csv"
        write_samples(samples, path)
        data = path.read_bytes()
        assert b"\r" not in data
        assert data.endswith(b"\n")

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("", "empty file"),
            ("sample_id,age\na,1\n", "line 1"),
            ("sample_id,protected_raw\n", "line 1"),
            ("sample_id,protected_raw,kwh\n", "no data rows"),
            ("sample_id,protected_raw,kwh\na,30,1.0\na,31,2.0\n", "line 3: duplicate sample_id"),
            ("sample_id,protected_raw,kwh\na,30\n", "line 2: expected 3 fields"),
            ("sample_id,protected_raw,kwh\na,30,abc\n", "line 2"),
        ],
    )
    def test_parse_errors_carry_line_numbers(self, tmp_path, text, fragment):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(ParseError, match=fragment):
            read_samples(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_samples(tmp_path / "nope.csv")

    def test_write_rejects_mismatched_features(self, tmp_path):
        samples = [
            Sample(id="a", protected_raw=30.0, features={"x": 1.0}),
            Sample(id="b", protected_raw=31.0, features={"y": 1.0}),
        ]
        with pytest.raises(ValueError, match="mismatched feature names"):
            write_samples(samples, tmp_path / "s.csv")


class TestLookupCsv:
    def test_round_trip(self, tmp_path):
        _, pred, _ = generate(SyntheticSpec(n=30, seed=4))
        path = tmp_path / "lookup.csv"
        write_lookup(pred, path)
        assert read_lookup(path).table == pred.table

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("sample_id,prediction\n", "missing required column 'group'"),
            ("sample_id,group,prediction,extra\n", "unknown column 'extra'"),
            ("sample_id,group,prediction\na,2,30\n", "group must be 0 or 1"),
            ("sample_id,group,prediction\na,0,x\n", "not a number"),
            ("sample_id,group,prediction\na,0,30\na,0,31\n", "line 3: duplicate row"),
            ("sample_id,group,prediction\na,0\n", "expected 3 fields"),
            ("sample_id,group,prediction\n", "no data rows"),
        ],
    )
    def test_parse_errors(self, tmp_path, text, fragment):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(ParseError, match=fragment):
            read_lookup(path)

    def test_read_scales_linearly(self, tmp_path):
        def timed_read(n):
            path = tmp_path / f"lookup_{n}.csv"
            rows = "\n".join(f"s{i},0,{30.0 + i % 7}" for i in range(n))
            path.write_text("sample_id,group,prediction\n" + rows + "\n")
            reps = []
            for _ in range(3):
                t0 = time.perf_counter()
                read_lookup(path)
                reps.append(time.perf_counter() - t0)
            return min(reps)

        small = timed_read(2_000)
        large = timed_read(20_000)
        # 10x the rows should cost far less than a quadratic blowup
        assert large < small * 60


TRACE_GOLDEN = """\
{
  "initial_di": 0.5,
  "final_di": 0.75,
  "minority": 0,
  "terminated_by": "candidates-exhausted",
  "elapsed_ms": null,
  "flips": [
    {
      "sample_id": "s0007",
      "old_label": 3,
      "new_label": 1,
      "di_after": 0.75
    }
  ]
}
"""


class TestTraceJson:
    def _trace(self, elapsed=None):
        return MitigationTrace(
            flips=(FlipRecord("s0007", 3, 1, 0.75),),
            initial_di=0.5,
            final_di=0.75,
            terminated_by="candidates-exhausted",
            minority=0,
            elapsed=elapsed,
        )

    def test_golden_layout(self, tmp_path):
        path = tmp_path / "trace.json"
        write_trace(self._trace(), path)
        assert path.read_text() == TRACE_GOLDEN

    def test_round_trip(self, tmp_path):
        path = tmp_path / "trace.json"
        write_trace(self._trace(elapsed=0.0042), path)
        back = read_trace(path)
        assert back == self._trace()  # elapsed is excluded from equality
        assert back.elapsed == pytest.approx(0.0042)

    def test_elapsed_serializes_in_milliseconds(self, tmp_path):
        path = tmp_path / "trace.json"
        write_trace(self._trace(elapsed=0.25), path)
        obj = json.loads(path.read_text())
        assert obj["elapsed_ms"] == 250.0

    def test_lf_endings(self, tmp_path):
        path = tmp_path / "trace.json"
        write_trace(self._trace(), path)
        data = path.read_bytes()
        assert b"\r" not in data
        assert data.endswith(b"\n")

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "trace.json"
        obj = json.loads(TRACE_GOLDEN)
        obj["surprise"] = 1
        path.write_text(json.dumps(obj))
        with pytest.raises(ParseError, match="unknown trace key 'surprise'"):
            read_trace(path)

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "trace.json"
        obj = json.loads(TRACE_GOLDEN)
        del obj["minority"]
        path.write_text(json.dumps(obj))
        with pytest.raises(ParseError, match="missing trace key 'minority'"):
            read_trace(path)

    def test_bad_flip_entry_rejected(self, tmp_path):
        path = tmp_path / "trace.json"
        obj = json.loads(TRACE_GOLDEN)
        del obj["flips"][0]["di_after"]
        path.write_text(json.dumps(obj))
        with pytest.raises(ParseError, match="missing flip key 'di_after'"):
            read_trace(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "trace.json"
        path.write_text("{")
        with pytest.raises(ParseError, match="invalid JSON"):
            read_trace(path)


class TestReportJson:
    def _report(self, age_rule):
        samples, pred, _ = generate(SyntheticSpec(n=60, seed=3))
        return compare(
            samples, pred, age_rule, LabelSpec(), epsilon=Fraction(1, 10),
            seeds=(1, 2), dataset_id="unit",
        )

    def test_round_trip_modulo_timing(self, tmp_path, age_rule):
        report = self._report(age_rule)
        path = tmp_path / "report.json"
        write_report(report, path)
        assert read_report(path).without_timing() == report.without_timing()

    def test_randomized_entries_carry_seed_first(self, tmp_path, age_rule):
        path = tmp_path / "report.json"
        write_report(self._report(age_rule), path)
        obj = json.loads(path.read_text())
        for entry in obj["randomized"]:
            assert list(entry) == ["seed", "flips", "elapsed_ms", "trajectory"]
        assert list(obj) == ["dataset_id", "epsilon", "priority", "randomized", "summary"]
        assert list(obj["summary"]) == ["mean_randomized_flips", "flip_ratio"]

    def test_stripped_report_serializes_null_timing(self, tmp_path, age_rule):
        path = tmp_path / "report.json"
        write_report(self._report(age_rule).without_timing(), path)
        obj = json.loads(path.read_text())
        assert obj["priority"]["elapsed_ms"] is None
        assert all(e["elapsed_ms"] is None for e in obj["randomized"])

    def test_unknown_report_key_rejected(self, tmp_path, age_rule):
        path = tmp_path / "report.json"
        write_report(self._report(age_rule), path)
        obj = json.loads(path.read_text())
        obj["extra"] = True
        path.write_text(json.dumps(obj))
        with pytest.raises(ParseError, match="unknown report key 'extra'"):
            read_report(path)


class TestTruthAndTrajectory:
    def test_truth_round_trip_and_order(self, tmp_path):
        path = tmp_path / "truth.json"
        write_truth({"s09", "s01", "s05"}, path)
        assert read_truth(path) == {"s01", "s05", "s09"}
        obj = json.loads(path.read_text())
        assert obj["biased_sample_ids"] == ["s01", "s05", "s09"]

    def test_trajectory_csv(self, tmp_path):
        path = tmp_path / "traj.csv"
        write_trajectory_csv([(0, 0.5), (1, 0.8)], path, header=["flip_index", "di"])
        assert path.read_text() == "flip_index,di\n0,0.5\n1,0.8\n"

import pytest

from fairtariff import GroupSpec, LabelSpec, PredictionPair


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(num, label): ties a test to one numbered acceptance criterion",
    )
    config._acceptance_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        num, label = marker.args
        item.config._acceptance_results[num] = (label, report.outcome == "passed")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        label, ok = results[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {label}")


@pytest.fixture
def age_rule() -> GroupSpec:
    return GroupSpec.numeric_threshold("age", 45.0)


def make_pairs(rows) -> list[PredictionPair]:
    """rows: (sample_id, y_factual, y_counterfactual, group) tuples."""
    return [
        PredictionPair(sample_id=sid, y_factual=yf, y_counterfactual=yc, group=g)
        for sid, yf, yc, g in rows
    ]


def fitted_labels(cut: int) -> LabelSpec:
    return LabelSpec(cut_value=cut)

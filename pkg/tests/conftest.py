"""Prints one PASS/FAIL line per release criterion after the run.

Outcomes are taken from the actual test reports of test_acceptance.py, so
the summary cannot disagree with the suite result.
"""

import pytest

_acceptance_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if "test_acceptance.py" in item.nodeid:
        if report.when == "call":
            _acceptance_outcomes[item.name] = report.passed
        elif not report.passed:
            # setup/teardown error counts as a failed criterion
            _acceptance_outcomes[item.name] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_acceptance_outcomes):
        verdict = "PASS" if _acceptance_outcomes[name] else "FAIL"
        label = name.removeprefix("test_criterion_").replace("_", " ")
        terminalreporter.write_line(f"criterion {label}: {verdict}")

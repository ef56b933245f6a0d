"""Shared pytest plumbing.

The acceptance tests double as the benchmark's release gate, so their verdicts
are echoed as one line per criterion in the terminal summary regardless of
output capturing.
"""

_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        verdict = _ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{verdict}  {name}")

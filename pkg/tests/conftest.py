"""Per-criterion acceptance reporting.

Tests named ``test_criterion_NN_*`` are grouped by number and summarized
as one PASS/FAIL line each at the end of the run.  Known limitations
(xfail) are reported as failures so the summary reflects what the code
actually reproduces.
"""

import re
from collections import defaultdict

CRITERIA = {
    1: "ordered-chain eigenstate delocalisation (IPR)",
    2: "ensemble-mean IPR strictly decreasing in disorder",
    3: "single-peaked current with interior optimum",
    4: "power-law fit of optimal dephasing rate vs IPR",
    5: "gradient suppression of finite-size effects",
    6: "steady-state conservation suite",
    7: "steady state agrees with long-time propagation",
    8: "thermal-bath limits (detailed balance, Gibbs state)",
    9: "finite-temperature optimal-rate trend",
    10: "closed-chain transient spreading",
    11: "uniformisation vs peak-current rates",
}

_PATTERN = re.compile(r"test_criterion_(\d+)")
_outcomes: dict[int, list[str]] = defaultdict(list)


def pytest_runtest_logreport(report):
    match = _PATTERN.search(report.nodeid)
    if match is None:
        return
    number = int(match.group(1))
    if report.when == "call":
        if hasattr(report, "wasxfail"):
            _outcomes[number].append("fail-known" if report.skipped else "pass")
        elif report.passed:
            _outcomes[number].append("pass")
        elif report.failed:
            _outcomes[number].append("fail")
    elif report.when == "setup" and (report.failed or report.skipped):
        _outcomes[number].append("fail" if report.failed else "skip")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_outcomes):
        outcomes = _outcomes[number]
        if "fail" in outcomes:
            verdict = "FAIL"
        elif "fail-known" in outcomes:
            verdict = "FAIL (known limitation)"
        elif "skip" in outcomes:
            verdict = "SKIP"
        else:
            verdict = "PASS"
        label = CRITERIA.get(number, "")
        terminalreporter.write_line(f"criterion {number:2d}: {verdict:22s} {label}")

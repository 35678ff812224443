import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    outcome = "PASS" if report.passed else "FAIL"
    _criteria[props["criterion"]] = (outcome, props.get("title", ""), props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        outcome, title, detail = _criteria[number]
        line = f"criterion {number:2d}: {outcome}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)

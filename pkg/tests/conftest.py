from importlib import resources

import pytest

from pabduce.syntax import parse_goal, parse_program

MURDER_GOAL = "enter(M,house1), killed(M,woman), enter(M,house2)"
POWER_GOAL = "hasnopower(v1), hasnopower(v2), hasnopower(v3), hasnopower(v4), hasnopower(v5)"


def bundled(name: str) -> str:
    return (resources.files("pabduce") / "programs" / f"{name}.alp").read_text()


def murder_program(q: float = 0.7):
    return parse_program(bundled("murder").replace("0.7 ::", f"{q!r} ::"))


@pytest.fixture(scope="session")
def murder():
    return murder_program(), parse_goal(MURDER_GOAL)


@pytest.fixture(scope="session")
def power():
    return parse_program(bundled("power")), parse_goal(POWER_GOAL)


# -- one summary line per acceptance criterion ---------------------------------

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            n, title = mark.args
            entry = _criteria.setdefault(n, {"title": title, "tests": {}})
            entry["tests"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if report.nodeid in entry["tests"]:
            if report.when == "call" or report.outcome != "passed":
                prev = entry["tests"][report.nodeid]
                if prev in (None, "passed"):
                    entry["tests"][report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        entry = _criteria[n]
        outcomes = list(entry["tests"].values())
        if any(o in (None, "skipped") for o in outcomes) and not any(o == "failed" for o in outcomes):
            verdict = "NOT RUN"
        else:
            verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {entry['title']}")

from __future__ import annotations

import shutil
from collections import OrderedDict
from pathlib import Path

import pytest

from montiweb.project import load_project

FIXTURES = Path(__file__).parent / "fixtures"
VERBATIM = FIXTURES / "verbatim"
CORRECTED = FIXTURES / "corrected"

_criteria: "OrderedDict[str, dict]" = OrderedDict()
_node_criterion: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            cid, title = mark.args
            _criteria.setdefault(cid, {"title": title, "outcomes": []})
            _node_criterion[item.nodeid] = cid


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    cid = _node_criterion.get(report.nodeid)
    if cid is not None:
        _criteria[cid]["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: int(c[2:])):
        info = _criteria[cid]
        outs = info["outcomes"]
        if not outs:
            status = "NOT RUN"
        elif all(o == "passed" for o in outs):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"{cid} {status:7} {info['title']}")


@pytest.fixture
def verbatim_project():
    return load_project(VERBATIM)


@pytest.fixture
def corrected_project():
    return load_project(CORRECTED)


@pytest.fixture
def corrected_model(corrected_project):
    model = corrected_project.check()
    assert model.ok, model.diagnostics
    return model


@pytest.fixture
def project_copy(tmp_path):
    """A writable copy of the corrected project."""
    dest = tmp_path / "project"
    shutil.copytree(CORRECTED, dest)
    return dest

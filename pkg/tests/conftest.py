from __future__ import annotations

from pathlib import Path

import pytest

from retrobleu.ngramdb import NgramDatabase, save_db
from retrobleu.routes import TokenKind, parse_route

FIXTURES = Path(__file__).parent / "fixtures"
ROUTE_FILES = {
    "patent_convergent_5step": FIXTURES / "routes" / "patent_convergent_5step.json",
    "generated_2step": FIXTURES / "routes" / "generated_2step.json",
    "patent_linear_4step": FIXTURES / "routes" / "patent_linear_4step.json",
    "generated_convergent_3step": FIXTURES / "routes" / "generated_convergent_3step.json",
}

# Template bigrams treated as experimentally precedented in the golden
# fixtures.  The 2-step generated route's single bigram is deliberately
# absent.
KNOWN_FIXTURE_BIGRAMS = {
    ("carbamate_fragment_coupling", "amide_condensation"): 17,
    ("amide_condensation", "ester_hydrolysis"): 102,
    ("carbamate_fragment_coupling", "nitro_reduction"): 9,
    ("nitro_reduction", "arene_nitration"): 64,
    ("sulfonamide_formation", "chlorosulfonylation"): 41,
    ("chlorosulfonylation", "phenol_methylation"): 12,
    ("phenol_methylation", "arene_bromination"): 55,
    ("suzuki_coupling", "boronate_formation"): 88,
    ("suzuki_coupling", "halide_exchange"): 23,
}


@pytest.fixture(scope="session")
def golden_routes():
    return {
        name: parse_route(path.read_text(encoding="utf-8"), route_id=name)
        for name, path in ROUTE_FILES.items()
    }


@pytest.fixture(scope="session")
def golden_db():
    return NgramDatabase(
        n=2,
        token_kind=TokenKind.TEMPLATE,
        entries={"\t".join(tokens): count for tokens, count in KNOWN_FIXTURE_BIGRAMS.items()},
        source_route_count=120,
        template_radius=1,
    )


@pytest.fixture(scope="session")
def golden_db_path(golden_db, tmp_path_factory):
    path = tmp_path_factory.mktemp("db") / "known_bigrams.ngdb"
    save_db(golden_db, path)
    return path


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion

_ACCEPTANCE_OUTCOMES: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): marks a test as one acceptance criterion"
    )


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    marker_name = _ACCEPTANCE_NAMES.get(report.nodeid)
    if marker_name is not None:
        _ACCEPTANCE_OUTCOMES[marker_name] = report.outcome


_ACCEPTANCE_NAMES: dict[str, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _ACCEPTANCE_NAMES[item.nodeid] = marker.kwargs.get("name", item.name)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_OUTCOMES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_OUTCOMES.items():
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")

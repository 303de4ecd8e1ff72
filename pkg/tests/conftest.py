import sys
from pathlib import Path

import pytest
from hypothesis import settings

from cogqe.config import RunConfig
from cogqe.corpus_index import ingest
from cogqe.engine import QueryEngine
from cogqe.eval_harness import parse_qrels, parse_topics
from cogqe.ga_tuner import EvalContext
from cogqe.linguistics import analyze_preparsed, load_preparsed

HERE = Path(__file__).parent
ROOT = HERE.parent
FIXTURES = HERE / "fixtures"
MINI = FIXTURES / "mini"
GA = FIXTURES / "ga"
BENCH = ROOT / "benchmark"

sys.path.insert(0, str(HERE))  # for the oracle module

# reproducible property runs
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

FIG4_QUERY = "coping with overcrowded prisons"
CAR_QUERY = "How to repair a car with engine failure"


@pytest.fixture(scope="session")
def mini_cfg():
    return RunConfig(corpus=str(MINI / "docs.trec"), kb=str(MINI / "kb.txt"),
                     topics=str(MINI / "topics.txt"), qrels=str(MINI / "qrels.txt"))


@pytest.fixture(scope="session")
def mini_engine(mini_cfg):
    return QueryEngine.from_config(mini_cfg)


@pytest.fixture(scope="session")
def mini_index(mini_engine):
    return mini_engine.index


@pytest.fixture(scope="session")
def mini_kb(mini_engine):
    return mini_engine.kb


@pytest.fixture(scope="session")
def bench_engine():
    return QueryEngine.from_config(RunConfig(corpus=str(BENCH / "docs.trec"),
                                             kb=str(BENCH / "kb.txt")))


@pytest.fixture(scope="session")
def bench_topics():
    return parse_topics(BENCH / "topics.txt")


@pytest.fixture(scope="session")
def bench_qrels():
    return parse_qrels(BENCH / "qrels.txt")


@pytest.fixture(scope="session")
def ga_ctx():
    idx = ingest(GA / "docs.trec")
    queries = {p.qid: analyze_preparsed(p, pipeline=idx.pipeline)
               for p in load_preparsed(GA / "queries.txt")}
    return EvalContext.build(queries, parse_qrels(GA / "qrels.txt"), idx)


# -- acceptance reporting: one PASS/FAIL line per criterion -------------------------

_CRITERIA: dict[str, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if rep.when == "call" or rep.failed:
        prev = _CRITERIA.get(item.nodeid, (name, True))[1]
        _CRITERIA[item.nodeid] = (name, prev and not rep.failed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    by_name: dict[str, bool] = {}
    for name, ok in _CRITERIA.values():
        by_name[name] = by_name.get(name, True) and ok
    terminalreporter.section("acceptance criteria")
    for name, ok in by_name.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")

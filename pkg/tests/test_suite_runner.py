"""
Tests for the verification suites and the runner.
"""
import asyncio
from functools import partial

import pytest

from alphaform.core.graph import dump_graph, graph_to_json
from alphaform.schemas import GraphResult, RunStatus, SuiteName, SuiteReport
from alphaform.services.generators import banana, dunce, exhaustive_graphs
from alphaform.services.suite_runner import (
    SuiteBounds,
    SuiteRunner,
    _timed,
    check_certificate,
    check_dodgson_identities,
    check_formal_qe,
    check_nilpotency,
    check_pipelines,
    collect_graph_files,
    graph_name,
    identity_checks,
)


def run(suite: SuiteName, bounds: SuiteBounds, jobs: int = 1) -> SuiteReport:
    return asyncio.run(SuiteRunner(jobs=jobs).execute(SuiteReport(suite=suite), bounds))


def test_graph_name():
    assert graph_name(dunce()) == "v3:2-1,3-1,3-2,3-2"


def test_collect_graph_files(tmp_path):
    dump_graph(dunce(), str(tmp_path / "b.json"))
    dump_graph(banana(3), str(tmp_path / "a.txt"))
    (tmp_path / "notes.md").write_text("ignored")
    found = collect_graph_files([str(tmp_path), "extra.json"])
    assert found == [str(tmp_path / "a.txt"), str(tmp_path / "b.json"), "extra.json"]


def test_check_nilpotency():
    result = check_nilpotency("dunce", graph_to_json(dunce()))
    assert result.passed
    assert result.details["coefficients"] == 1
    assert not result.details["edge_bound"]
    assert check_nilpotency("banana-3", graph_to_json(banana(3))).details["edge_bound"]


def test_check_pipelines_skips_past_guard():
    result = check_pipelines("dunce", graph_to_json(dunce()), max_edges=3)
    assert not result.passed
    assert result.status == RunStatus.SKIPPED
    assert "skipped" in result.details
    assert _timed(partial(check_pipelines, max_edges=3), "dunce", graph_to_json(dunce())).status == RunStatus.SKIPPED
    assert check_pipelines("dunce", graph_to_json(dunce())).passed


def test_skipped_items_are_not_a_clean_run():
    report = run(SuiteName.PIPELINES, SuiteBounds(max_vertices=3, max_edges=4, brute_max_edges=1))
    assert len(report.results) == 26
    assert report.skipped_count == 25
    assert report.passed_count == 1
    assert report.failed_count == 0
    assert report.first_failure() is None
    assert not report.all_passed
    assert report.summary() == "pipelines: 1 passed, 0 failed, 25 skipped"


def test_identity_checks_hold():
    checks = identity_checks(dunce())
    assert checks
    assert all(c.holds for c in checks)
    assert check_dodgson_identities("dunce", graph_to_json(dunce())).passed


def test_formal_checks():
    assert check_formal_qe("formal-qe-L2", 2).details["unquotiented"]
    result = check_certificate("certificate-L2", 2)
    assert result.passed
    assert result.details == {"L": 2, "terms": 6, "pairs": 3}


def test_timed_turns_exceptions_into_failures():
    def broken(name, payload):
        raise ValueError("no luck")

    result = _timed(broken, "broken", None)
    assert not result.passed
    assert result.status == RunStatus.FAILED
    assert result.error_message == "ValueError: no luck"

    ok = _timed(lambda name, payload: GraphResult(name=name, passed=True), "ok", None)
    assert ok.status == RunStatus.COMPLETED
    assert ok.seconds >= 0


def test_formal_qe_suite():
    report = run(SuiteName.FORMAL_QE, SuiteBounds(loops=[2, 4]))
    assert report.status == RunStatus.COMPLETED
    assert [r.name for r in report.results] == ["formal-qe-L2", "formal-qe-L4"]
    assert report.all_passed
    assert report.metadata.completed_at is not None
    assert report.bounds["loops"] == [2, 4]


def test_bad_loop_number_is_reported():
    report = run(SuiteName.FORMAL_QE, SuiteBounds(loops=[3]))
    assert report.status == RunStatus.COMPLETED
    assert not report.all_passed
    assert report.first_failure().error_message.startswith("ValueError")
    assert "first failure: formal-qe-L3" in report.summary()


def test_pipelines_suite_on_small_corpus():
    bounds = SuiteBounds(max_vertices=3, max_edges=3, random_count=2, random_max_vertices=3, random_max_edges=4, seed=5)
    report = run(SuiteName.PIPELINES, bounds)
    # 3 two-vertex and 10 three-vertex graphs, then the random ones
    assert report.passed_count == 15
    assert report.all_passed
    assert report.results[-1].name.startswith("random-1:")
    assert report.metadata.seed == 5


def test_identity_suite_on_graph_files(tmp_path):
    dump_graph(dunce(), str(tmp_path / "dunce.json"))
    report = run(SuiteName.DODGSON_IDENTITIES, SuiteBounds(graphs=[str(tmp_path)]))
    assert [r.name for r in report.results] == [str(tmp_path / "dunce.json")]
    assert report.all_passed


def test_parallel_run_keeps_order():
    report = run(SuiteName.CERTIFICATES, SuiteBounds(loops=[2, 3, 2]), jobs=2)
    assert [r.name for r in report.results] == ["certificate-L2", "certificate-L3", "certificate-L2"]
    assert [r.passed for r in report.results] == [True, False, True]
    assert report.metadata.jobs == 2


@pytest.mark.slow
def test_pipelines_suite_on_full_corpus():
    bounds = SuiteBounds(max_vertices=4, max_edges=6, random_count=100, random_max_edges=8)
    report = run(SuiteName.PIPELINES, bounds, jobs=2)
    assert len(report.results) == len(list(exhaustive_graphs(4, 6))) + 100
    assert report.skipped_count == 0
    assert report.all_passed, report.summary()

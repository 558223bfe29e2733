"""
Verification suite execution - fans suite items out and assembles a SuiteReport.
"""
import asyncio
import logging
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from functools import partial
from itertools import combinations
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from ..core.alpha import alpha_tree_sum, edge_bound_check, pipelines_agree, wedge_self
from ..core.dodgson import (
    IdentityCheck,
    IndexSet,
    edge_edge_combine,
    forest_expansion,
    jacobi_expand,
    vertex_edge_combine,
)
from ..core.errors import GuardExceeded
from ..core.graph import Graph, graph_from_json, graph_to_json, load_graph, loop_number
from ..core.poly import poly_to_text
from ..core.qe import cancellation_certificate, qe_formal
from ..schemas import GraphResult, RunStatus, SuiteName, SuiteReport
from .generators import exhaustive_graphs, nilpotency_corpus, random_connected

logger = logging.getLogger(__name__)

GRAPH_SUFFIXES = (".json", ".txt", ".graph")

JACOBI_PAIR_LIMIT = 6


class SuiteBounds(BaseModel):
    """Corpus selection for one suite run."""
    graphs: List[str] = Field(default_factory=list)
    max_vertices: Optional[int] = None
    max_edges: Optional[int] = None
    brute_max_edges: int = 12
    random_count: int = 0
    random_max_vertices: int = 5
    random_max_edges: int = 8
    loops: List[int] = Field(default_factory=lambda: [2])
    seed: int = 0


Item = Tuple[str, object]


def graph_name(graph: Graph) -> str:
    return f"v{graph.vertex_count}:" + ",".join(f"{t}-{h}" for t, h in graph.edges)


def collect_graph_files(paths: Sequence[str]) -> List[str]:
    """Files as given; directories contribute their graph files in sorted order."""
    found = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found.extend(str(p) for p in sorted(path.iterdir()) if p.suffix in GRAPH_SUFFIXES)
        else:
            found.append(str(path))
    return found


def _timed(check: Callable[..., GraphResult], name: str, payload) -> GraphResult:
    """Run one check; any exception becomes a FAILED result with its message."""
    start = time.perf_counter()
    try:
        result = check(name, payload)
        if result.status == RunStatus.QUEUED:
            result.status = RunStatus.COMPLETED
    except Exception as e:
        logger.warning("suite item %s raised %s", name, e)
        result = GraphResult(
            name=name,
            passed=False,
            status=RunStatus.FAILED,
            error_message=f"{type(e).__name__}: {e}",
        )
    result.seconds = time.perf_counter() - start
    return result


def check_nilpotency(name: str, graph_json: str) -> GraphResult:
    """α∧α = 0 coefficient by coefficient; trees pass trivially."""
    graph = graph_from_json(graph_json)
    alpha = alpha_tree_sum(graph)
    loops = loop_number(graph)
    details = {"L": loops, "edges": graph.edge_count, "edge_bound": edge_bound_check(graph)}
    if loops == 0:
        return GraphResult(name=name, passed=True, details=details)
    coefficients = wedge_self(alpha)
    details["coefficients"] = len(coefficients)
    for coefficient in coefficients:
        if not coefficient.is_zero:
            details["graph"] = graph_json.strip()
            return GraphResult(
                name=name,
                passed=False,
                details=details,
                witness=f"dE {list(coefficient.edge_set)}: {poly_to_text(coefficient.value)}",
            )
    return GraphResult(name=name, passed=True, details=details)


def check_pipelines(name: str, graph_json: str, max_edges: int = 12) -> GraphResult:
    graph = graph_from_json(graph_json)
    details = {"L": loop_number(graph), "edges": graph.edge_count}
    try:
        comparison = pipelines_agree(graph, max_edges)
    except GuardExceeded as e:
        logger.warning("%s skipped: %s", name, e)
        details["skipped"] = str(e)
        return GraphResult(name=name, passed=False, status=RunStatus.SKIPPED, details=details)
    if comparison.agree:
        return GraphResult(name=name, passed=True, details=details)
    details["graph"] = graph_json.strip()
    return GraphResult(
        name=name,
        passed=False,
        details=details,
        witness=f"{comparison.witness_word}: brute {comparison.brute} vs tree-sum {comparison.tree_sum}",
    )


def identity_checks(graph: Graph) -> List[IdentityCheck]:
    """Every identity instance run on one graph, non-strict."""
    edges = range(1, graph.edge_count + 1)
    checks = [forest_expansion(graph, IndexSet.edges(), IndexSet.edges(), strict=False)]
    for e, f in combinations(edges, 2):
        checks.append(forest_expansion(graph, IndexSet.edges(e), IndexSet.edges(f), strict=False))
        checks.append(edge_edge_combine(graph, e, f, strict=False))
    for e in edges:
        for v in graph.position_vertices:
            checks.append(vertex_edge_combine(graph, e, v, strict=False))
    pairs = list(combinations(edges, 2))[:JACOBI_PAIR_LIMIT]
    for rows in pairs:
        for cols in pairs:
            checks.append(jacobi_expand(graph, IndexSet.edges(*rows), IndexSet.edges(*cols), strict=False))
    if len(graph.position_vertices) >= 2:
        first_two = graph.position_vertices[:2]
        checks.append(jacobi_expand(graph, IndexSet.vertices(*first_two), IndexSet.vertices(*first_two), strict=False))
    return checks


def check_dodgson_identities(name: str, graph_json: str) -> GraphResult:
    graph = graph_from_json(graph_json)
    checks = identity_checks(graph)
    details = {"identities": len(checks)}
    for check in checks:
        if not check.holds:
            details["graph"] = graph_json.strip()
            return GraphResult(
                name=name,
                passed=False,
                details=details,
                witness=f"{check.name}: {poly_to_text(check.lhs)} != {poly_to_text(check.rhs)}",
            )
    return GraphResult(name=name, passed=True, details=details)


def check_formal_qe(name: str, loops: int) -> GraphResult:
    value = qe_formal(loops)
    details = {"L": loops, "quotient": True}
    if value:
        return GraphResult(name=name, passed=False, details=details, witness=poly_to_text(value))
    if loops == 2:
        full = qe_formal(loops, quotient=False)
        details["unquotiented"] = True
        if full:
            return GraphResult(name=name, passed=False, details=details, witness=poly_to_text(full))
    return GraphResult(name=name, passed=True, details=details)


def check_certificate(name: str, loops: int) -> GraphResult:
    certificate = cancellation_certificate(loops)
    return GraphResult(
        name=name,
        passed=certificate.pair_count * 2 == certificate.term_count,
        details={"L": loops, "terms": certificate.term_count, "pairs": certificate.pair_count},
    )


class SuiteRunner:
    """Runs one suite, optionally across a process pool."""

    def __init__(self, jobs: Optional[int] = None):
        self.jobs = jobs if jobs is not None else int(os.getenv("ALPHAFORM_JOBS", "1"))

    async def execute(self, report: SuiteReport, bounds: SuiteBounds) -> SuiteReport:
        report.status = RunStatus.RUNNING
        report.bounds = bounds.model_dump()
        report.metadata.jobs = self.jobs
        report.metadata.seed = bounds.seed
        if not report.metadata.started_at:
            report.metadata.started_at = datetime.now(timezone.utc)

        try:
            if report.suite == SuiteName.NILPOTENCY:
                check, items = check_nilpotency, self._graph_items(bounds, nilpotency_corpus)
            elif report.suite == SuiteName.PIPELINES:
                check = partial(check_pipelines, max_edges=bounds.brute_max_edges)
                items = self._graph_items(bounds, None, default_bounds=(4, 6)) + self._random_items(bounds)
            elif report.suite == SuiteName.DODGSON_IDENTITIES:
                check, items = check_dodgson_identities, self._graph_items(bounds, nilpotency_corpus)
            elif report.suite == SuiteName.FORMAL_QE:
                check, items = check_formal_qe, [(f"formal-qe-L{n}", n) for n in bounds.loops]
            elif report.suite == SuiteName.CERTIFICATES:
                check, items = check_certificate, [(f"certificate-L{n}", n) for n in bounds.loops]
            else:
                raise ValueError(f"Unsupported suite: {report.suite}")

            report.results = await self._run_all(check, items)
            report.status = RunStatus.COMPLETED

        except Exception as e:
            logger.error("suite %s failed: %s", report.suite, e)
            report.status = RunStatus.FAILED
            report.metadata.error_message = f"{type(e).__name__}: {e}"

        report.metadata.completed_at = datetime.now(timezone.utc)
        for result in report.results:
            if result.status == RunStatus.SKIPPED:
                logger.warning("%s: %s skipped: %s", report.suite, result.name, result.details.get("skipped"))
            elif not result.passed:
                logger.warning("%s: %s failed: %s", report.suite, result.name,
                               result.witness or result.error_message)
        return report

    async def _run_all(self, check: Callable[..., GraphResult], items: List[Item]) -> List[GraphResult]:
        """Results come back in item order whatever the job count."""
        if self.jobs <= 1 or len(items) <= 1:
            return [_timed(check, name, payload) for name, payload in items]
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=self.jobs) as pool:
            futures = [
                loop.run_in_executor(pool, _timed, check, name, payload)
                for name, payload in items
            ]
            return list(await asyncio.gather(*futures))

    def _graph_items(self, bounds: SuiteBounds, corpus, default_bounds: Optional[Tuple[int, int]] = None) -> List[Item]:
        if bounds.graphs:
            return [(path, graph_to_json(load_graph(path))) for path in collect_graph_files(bounds.graphs)]
        max_vertices, max_edges = bounds.max_vertices, bounds.max_edges
        if max_vertices is None and default_bounds is not None:
            max_vertices = default_bounds[0]
        if max_edges is None and default_bounds is not None:
            max_edges = default_bounds[1]
        if max_vertices is not None:
            return [
                (graph_name(g), graph_to_json(g))
                for g in exhaustive_graphs(max_vertices, max_edges if max_edges is not None else max_vertices + 2)
            ]
        return [(name, graph_to_json(g)) for name, g in corpus()]

    def _random_items(self, bounds: SuiteBounds) -> List[Item]:
        rng = random.Random(bounds.seed)
        items = []
        for i in range(bounds.random_count):
            n = rng.randint(2, bounds.random_max_vertices)
            m = rng.randint(n - 1, max(n - 1, bounds.random_max_edges))
            graph = random_connected(n, m, rng.randrange(2 ** 31))
            items.append((f"random-{i}:{graph_name(graph)}", graph_to_json(graph)))
        return items

"""
alphaform - command-line entry point.

Computes the differential form α_Γ of a Feynman graph with two independent
pipelines, checks α∧α = 0, prints Symanzik and Dodgson polynomials and runs
the verification suites.
"""
import argparse
import asyncio
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional, Sequence

from .core.alpha import alpha_brute, alpha_tree_sum, compare_alpha, edge_bound_check, wedge_self
from .core.dodgson import IndexSet, dodgson, parametric_integrand, symanzik_first, symanzik_kirchhoff, symanzik_second
from .core.errors import AlphaformError, CertificateFailure, GuardExceeded
from .core.graph import Graph, dump_graph, graph_to_json, load_graph, loop_number, with_v_star
from .core.poly import poly_to_json, poly_to_text
from .core.qe import cancellation_certificate
from .core.render import alpha_to_latex, alpha_to_text, dodgson_label_latex, poly_to_latex, result_record
from .db import ReportDB
from .schemas import Command, GraphFamily, OutputFormat, RunConfig, SuiteName, SuiteReport
from .services.generators import generate
from .services.suite_runner import SuiteBounds, SuiteRunner

JOBS = int(os.getenv("ALPHAFORM_JOBS", "1"))
MAX_EDGES = int(os.getenv("ALPHAFORM_MAX_EDGES", "12"))
DB_PATH = os.getenv("ALPHAFORM_DB_PATH", "./data/reports.db")
LOG_LEVEL = os.getenv("ALPHAFORM_LOG_LEVEL", "WARNING")

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

logger = logging.getLogger("alphaform")


def _config(args: argparse.Namespace, command: Command) -> RunConfig:
    return RunConfig(
        command=command,
        inputs=[p for p in [getattr(args, "graph", None)] if p],
        v_star=getattr(args, "v_star", None),
        output_format=args.format,
        with_pi=args.with_pi,
        max_edges=args.brute_max_edges if command == Command.VERIFY else args.max_edges,
        seed=args.seed,
        jobs=args.jobs,
    )


def _load(config: RunConfig) -> Graph:
    graph = load_graph(config.inputs[0])
    if config.v_star is not None:
        graph = with_v_star(graph, config.v_star)
    return graph


def _print_json(payload: Any) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False))


def cmd_alpha(args: argparse.Namespace) -> int:
    config = _config(args, Command.ALPHA)
    graph = _load(config)
    timings = {}

    start = time.perf_counter()
    alpha = alpha_tree_sum(graph)
    timings["tree_sum"] = time.perf_counter() - start

    agree: Optional[bool] = None
    try:
        start = time.perf_counter()
        brute = alpha_brute(graph, config.max_edges)
        timings["brute"] = time.perf_counter() - start
        comparison = compare_alpha(brute, alpha)
        agree = comparison.agree
        if not agree:
            logger.warning("pipelines disagree at %s: brute %s, tree-sum %s",
                           comparison.witness_word, comparison.brute, comparison.tree_sum)
    except GuardExceeded as e:
        print(f"notice: {e}; showing the tree-sum pipeline only", file=sys.stderr)

    if config.output_format == OutputFormat.JSON:
        wedge_zero = all(c.is_zero for c in wedge_self(alpha))
        _print_json(result_record(config.inputs[0], alpha, wedge_zero, agree, timings, config.with_pi))
    elif config.output_format == OutputFormat.LATEX:
        print(alpha_to_latex(alpha, config.with_pi))
    else:
        print(alpha_to_text(alpha, config.with_pi))
        if agree is not None:
            print(f"pipelines: {'agree' if agree else 'DISAGREE'}")
    return EXIT_PASS if agree is not False else EXIT_FAILURE


def cmd_wedge_check(args: argparse.Namespace) -> int:
    config = _config(args, Command.WEDGE_CHECK)
    graph = _load(config)
    alpha = alpha_tree_sum(graph)
    loops = loop_number(graph)
    coefficients = [] if loops == 0 else wedge_self(alpha)
    nonzero = [c for c in coefficients if not c.is_zero]

    if config.output_format == OutputFormat.JSON:
        _print_json({
            "graph": config.inputs[0],
            "L": loops,
            "edge_bound": edge_bound_check(graph),
            "coefficients": [
                {"edges": list(c.edge_set), "poly": poly_to_json(c.value), "text": poly_to_text(c.value)}
                for c in coefficients
            ],
            "wedge_zero": not nonzero,
        })
    else:
        for c in nonzero:
            print(f"dE {list(c.edge_set)}: {poly_to_text(c.value)}")
        if loops == 0:
            print("L = 0: α is a constant, nothing to check")
        elif edge_bound_check(graph):
            print(f"α∧α = 0 (2L = {2 * loops} exceeds |E| = {graph.edge_count})")
        elif not nonzero:
            print(f"α∧α = 0 ({len(coefficients)} coefficients checked)")
        else:
            print(f"α∧α ≠ 0 ({len(nonzero)} of {len(coefficients)} coefficients nonzero)")
    return EXIT_PASS if not nonzero else EXIT_FAILURE


def _print_poly(config: RunConfig, label: str, label_latex: str, value) -> None:
    if config.output_format == OutputFormat.JSON:
        _print_json({
            "graph": config.inputs[0],
            "name": label,
            "variables": [str(s) for s in value.ring.symbols],
            "poly": poly_to_json(value),
            "text": poly_to_text(value),
        })
    elif config.output_format == OutputFormat.LATEX:
        print(f"{label_latex} = {poly_to_latex(value)}")
    else:
        print(poly_to_text(value))


def cmd_symanzik(args: argparse.Namespace) -> int:
    config = _config(args, Command.SYMANZIK)
    graph = _load(config)
    if args.dimension is not None:
        integrand = parametric_integrand(graph, Fraction(args.dimension), massless=args.massless)
        print(integrand.render())
    elif args.second:
        _print_poly(config, "phi", r"\phi", symanzik_second(graph, massless=args.massless))
    elif args.kirchhoff:
        _print_poly(config, "psi", r"\psi", symanzik_kirchhoff(graph))
    else:
        _print_poly(config, "psi", r"\psi", symanzik_first(graph))
    return EXIT_PASS


def cmd_dodgson(args: argparse.Namespace) -> int:
    config = _config(args, Command.DODGSON)
    graph = _load(config)
    rows, cols = IndexSet.parse(args.rows), IndexSet.parse(args.cols)
    result = dodgson(graph, rows, cols)
    _print_poly(config, f"psi^{rows};{cols}", dodgson_label_latex(rows.indices, cols.indices), result.value)
    return EXIT_PASS


def _int_list(text: Optional[str]) -> List[int]:
    return [int(t) for t in text.split(",") if t.strip()] if text else []


def cmd_verify(args: argparse.Namespace) -> int:
    config = _config(args, Command.VERIFY)
    bounds = SuiteBounds(
        graphs=args.graphs or [],
        max_vertices=args.max_vertices,
        max_edges=args.max_edges,
        brute_max_edges=config.max_edges,
        random_count=args.random,
        loops=_int_list(args.loops) or [2],
        seed=config.seed,
    )
    report = SuiteReport(suite=SuiteName(args.suite))
    report = asyncio.run(SuiteRunner(jobs=config.jobs).execute(report, bounds))

    if args.store:
        ReportDB(DB_PATH).create_report(report)

    if config.output_format == OutputFormat.JSON:
        print(report.model_dump_json(indent=2))
    else:
        print(report.summary())
    return EXIT_PASS if report.all_passed else EXIT_FAILURE


def cmd_gen(args: argparse.Namespace) -> int:
    graphs = generate(
        GraphFamily(args.family),
        size=args.size,
        seed=args.seed,
        vertices=args.v,
        edges=args.e,
        count=args.count,
    )
    if not args.out:
        for _, graph in graphs:
            sys.stdout.write(graph_to_json(graph))
        return EXIT_PASS
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, graph in graphs:
        path = out / f"{name}.json"
        dump_graph(graph, str(path))
        print(path)
    return EXIT_PASS


def cmd_certificate(args: argparse.Namespace) -> int:
    try:
        certificate = cancellation_certificate(args.loops)
    except CertificateFailure as e:
        print(f"certificate failed: {e}", file=sys.stderr)
        return EXIT_FAILURE

    if args.format == OutputFormat.JSON.value:
        print(certificate.model_dump_json(indent=2))
        return EXIT_PASS
    print(f"L = {certificate.loops}: {certificate.term_count} terms, "
          f"{certificate.pair_count} pairs, 0 unpaired")
    for entry in certificate.entries[:args.show]:
        swaps = " ".join(f"({a},{b})" for a, b in entry.swapped)
        print(f"{entry.term}  <->  {entry.partner}  fixed {entry.fixed} swaps {swaps}")
    return EXIT_PASS


def cmd_reports(args: argparse.Namespace) -> int:
    db = ReportDB(DB_PATH)
    if args.id:
        report = db.get_report(args.id)
        if report is None:
            print(f"no report {args.id}", file=sys.stderr)
            return EXIT_FAILURE
        print(report.model_dump_json(indent=2))
        return EXIT_PASS
    for report in db.list_reports(limit=args.limit):
        created = report.metadata.created_at.isoformat(timespec="seconds")
        print(f"{report.report_id}  {created}  {report.suite:<20} {report.status:<9} "
              f"{report.passed_count} passed, {report.failed_count} failed, "
              f"{report.skipped_count} skipped")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.TEXT.value,
                        help="Output format (default: text)")
    output.add_argument("--with-pi", action="store_true", help="Show the π factors of the prefactor")
    output.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    output.add_argument("--jobs", type=int, default=JOBS, help=f"Worker processes (default: {JOBS})")

    common = argparse.ArgumentParser(add_help=False, parents=[output])
    common.add_argument("--v-star", type=int, default=None, help="Override the distinguished vertex")
    common.add_argument("--max-edges", type=int, default=MAX_EDGES,
                        help=f"Brute-force pipeline edge guard (default: {MAX_EDGES})")

    parser = argparse.ArgumentParser(
        prog="alphaform",
        description="Symbolic α_Γ forms of Feynman graphs and the verification of α∧α = 0.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Exit codes: 0 pass, 1 failure, 2 usage or input error.",
    )
    parser.add_argument("--log-level", default=LOG_LEVEL, help=f"Logging level (default: {LOG_LEVEL})")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # -- alpha --
    p_alpha = subparsers.add_parser(Command.ALPHA.value, parents=[common],
                                    help="Compute α_Γ with both pipelines")
    p_alpha.add_argument("graph", help="Graph file (.json or plain text)")
    p_alpha.set_defaults(handler=cmd_alpha)

    # -- wedge-check --
    p_wedge = subparsers.add_parser(Command.WEDGE_CHECK.value, parents=[common],
                                    help="Check α∧α = 0 coefficient by coefficient")
    p_wedge.add_argument("graph")
    p_wedge.set_defaults(handler=cmd_wedge_check)

    # -- symanzik --
    p_sym = subparsers.add_parser(Command.SYMANZIK.value, parents=[common],
                                  help="First or second Symanzik polynomial")
    p_sym.add_argument("graph")
    p_sym.add_argument("--second", action="store_true", help="Second Symanzik polynomial φ")
    p_sym.add_argument("--massless", action="store_true", help="Drop the mass term of φ")
    p_sym.add_argument("--kirchhoff", action="store_true", help="ψ from the reduced Laplacian")
    p_sym.add_argument("--dimension", type=str, default=None,
                       help="Print the parametric integrand in this spacetime dimension")
    p_sym.set_defaults(handler=cmd_symanzik)

    # -- dodgson --
    p_dod = subparsers.add_parser(Command.DODGSON.value, parents=[common], help="Dodgson polynomial ψ^{A,B}")
    p_dod.add_argument("graph")
    p_dod.add_argument("--rows", required=True, help="Deleted rows, e.g. e:1,2 or v:1")
    p_dod.add_argument("--cols", required=True, help="Deleted columns, e.g. e:3,4 or v:2")
    p_dod.set_defaults(handler=cmd_dodgson)

    # -- verify --
    p_ver = subparsers.add_parser(Command.VERIFY.value, parents=[output], help="Run a verification suite")
    p_ver.add_argument("suite", choices=[s.value for s in SuiteName])
    p_ver.add_argument("--graphs", nargs="*", help="Graph files or directories instead of a generated corpus")
    p_ver.add_argument("--max-vertices", type=int, default=None, help="Exhaustive corpus vertex bound")
    p_ver.add_argument("--max-edges", type=int, default=None, help="Exhaustive corpus edge bound")
    p_ver.add_argument("--brute-max-edges", type=int, default=MAX_EDGES,
                       help=f"Brute-force pipeline edge guard (default: {MAX_EDGES})")
    p_ver.add_argument("--random", type=int, default=0, help="Extra seeded random graphs (pipelines suite)")
    p_ver.add_argument("--loops", default=None, help="Loop numbers for formal-qe/certificates, e.g. 2,4")
    p_ver.add_argument("--store", action="store_true", help=f"Persist the report to {DB_PATH}")
    p_ver.set_defaults(handler=cmd_verify)

    # -- gen --
    p_gen = subparsers.add_parser(Command.GEN.value, parents=[output], help="Generate graph files")
    p_gen.add_argument("family", choices=[f.value for f in GraphFamily])
    p_gen.add_argument("size", nargs="?", default=None, help="Family size, e.g. 3 or 5,5,5")
    p_gen.add_argument("--v", type=int, default=None, help="Vertices (random family)")
    p_gen.add_argument("--e", type=int, default=None, help="Edges (random family)")
    p_gen.add_argument("--count", type=int, default=1, help="Number of random graphs (default: 1)")
    p_gen.add_argument("--out", default=None, help="Output directory; stdout when omitted")
    p_gen.set_defaults(handler=cmd_gen)

    # -- certificate --
    p_cert = subparsers.add_parser(Command.CERTIFICATE.value, parents=[output],
                                   help="Pairwise cancellation certificate of the formal Q_E sum")
    p_cert.add_argument("loops", type=int)
    p_cert.add_argument("--show", type=int, default=3, help="Pairs to print (default: 3)")
    p_cert.set_defaults(handler=cmd_certificate)

    # -- reports --
    p_rep = subparsers.add_parser(Command.REPORTS.value, help="List stored suite reports")
    p_rep.add_argument("--limit", type=int, default=20)
    p_rep.add_argument("--id", default=None, help="Show one report in full")
    p_rep.set_defaults(handler=cmd_reports)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AlphaformError as e:
        print(f"failure: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Exit codes: 0 success, 1 graph validation failure, 2 I/O or parse error,
3 numeric failure (path cap exceeded, zero denominator).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .conjugate import flow_check, read_counts
from .errors import GraphError, NumericError, ParseError, PathCapExceeded
from .graph import read_graph, validate
from .montecarlo import SCHEMES, SamplerConfig
from .queries import Query
from .report import RunConfig, build_report, canned_queries, dumps, edges_csv, load_inputs, queries_csv

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class InvalidGraph(Exception):
    pass


def cmd_validate(graph_path, counts_path=None) -> tuple[int, str]:
    dag = read_graph(graph_path)
    report = validate(dag)
    lines = [str(report)]
    if counts_path is not None:
        path = Path(counts_path)
        counts = read_counts(path.read_text(encoding="utf-8"), dag, source=str(path))
        if report.ok:
            lines.append(str(flow_check(counts, dag)))
    return (EXIT_OK if report.ok else EXIT_INVALID), "\n".join(lines) + "\n"


def _run(cfg: RunConfig, queries) -> dict:
    dag, counts, prior, inputs = load_inputs(cfg)
    report = validate(dag)
    if not report.ok:
        raise InvalidGraph(str(report))
    if queries is None:
        queries = canned_queries(dag)
    return build_report(dag, counts, prior, cfg.sampler, queries, inputs, cfg.histogram_dir)


def cmd_fit(cfg: RunConfig) -> dict:
    return _run(cfg, ())


def cmd_query(cfg: RunConfig) -> dict:
    if not cfg.queries:
        raise ValueError("cmd_query needs at least one query")
    return _run(cfg, tuple(cfg.queries))


def cmd_report(cfg: RunConfig) -> dict:
    return _run(cfg, None)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report)
    if report["queries"]:
        return queries_csv(report)
    return edges_csv(report)


def _parser():
    parser = argparse.ArgumentParser(
        prog="dagposterior",
        description="Bayesian transition, absorption and inverse probabilities on absorbing DAGs.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("validate", help="check the graph and, optionally, count flow balance")
    v.add_argument("--graph", required=True)
    v.add_argument("--counts")

    for name, text in (
        ("fit", "analytic per-edge posteriors"),
        ("query", "Monte-Carlo summaries of the given queries"),
        ("report", "fit plus absorption and inverse-probability queries"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--graph", required=True)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--counts")
        src.add_argument("--trajectories")
        p.add_argument("--prior", default="perks", help="perks | symmetric:<c> | custom:<csv>")
        p.add_argument("--samples", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--ci", type=float, default=0.95)
        p.add_argument("--bins", type=int, default=100)
        p.add_argument("--scheme", choices=SCHEMES, default="dirichlet")
        p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
        p.add_argument("--histograms", metavar="DIR", help="write one histogram CSV per query here")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if name == "query":
            p.add_argument(
                "--query", action="append", required=True, dest="queries",
                help="kind:NODE[:NODE...], e.g. forward:A:H, inverse:D:I, absorption_profile:A, path:A:W1:D",
            )
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "validate":
            status, text = cmd_validate(args.graph, args.counts)
            sys.stdout.write(text)
            return status
        cfg = RunConfig(
            graph_path=args.graph,
            counts_path=args.counts,
            trajectories_path=args.trajectories,
            prior=args.prior,
            sampler=SamplerConfig(
                samples=args.samples,
                seed=args.seed,
                ci_level=args.ci,
                histogram_bins=args.bins,
                scheme=args.scheme,
                workers=args.threads,
            ),
            queries=tuple(Query.parse(q) for q in getattr(args, "queries", None) or ()),
            output_path=args.out,
            output_format=args.format,
            histogram_dir=args.histograms,
        )
        report = {"fit": cmd_fit, "query": cmd_query, "report": cmd_report}[args.cmd](cfg)
        text = render(report, cfg.output_format)
        if cfg.output_path:
            Path(cfg.output_path).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except InvalidGraph as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (PathCapExceeded, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ParseError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

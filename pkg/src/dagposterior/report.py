"""Run configuration and report assembly.

A report is a plain JSON-serializable dict with top-level keys ``meta``,
``validation``, ``flow``, ``edges`` and ``queries``. It contains no timestamps
or host details, so identical configurations give byte-identical output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .conjugate import (
    PriorSpec,
    TransitionCounts,
    beta_interval,
    beta_marginal,
    beta_mean,
    beta_sd,
    fit_posterior,
    flow_check,
    read_counts,
    read_prior,
    read_trajectories,
)
from .errors import GraphError
from .graph import Dag, read_graph, validate
from .montecarlo import SamplerConfig, draw_joint
from .queries import Query, run_query

__all__ = [
    "RunConfig",
    "parse_prior",
    "load_inputs",
    "edge_summaries",
    "build_report",
    "canned_queries",
    "dumps",
    "edges_csv",
    "queries_csv",
]


@dataclass(frozen=True)
class RunConfig:
    graph_path: str
    counts_path: str | None = None
    trajectories_path: str | None = None
    prior: str = "perks"
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    queries: tuple[Query, ...] = ()
    output_path: str | None = None
    output_format: str = "json"
    histogram_dir: str | None = None

    def __post_init__(self):
        if (self.counts_path is None) == (self.trajectories_path is None):
            raise ValueError("give exactly one of counts_path and trajectories_path")
        if self.output_format not in ("json", "csv"):
            raise ValueError(f"unknown output format {self.output_format!r}")


def parse_prior(selector: str, dag: Dag) -> PriorSpec:
    """``perks``, ``symmetric:<c>`` or ``custom:<csv path>``."""
    kind, _, arg = selector.partition(":")
    if kind == "perks" and not arg:
        return PriorSpec.perks()
    if kind == "symmetric":
        try:
            return PriorSpec.symmetric(float(arg))
        except ValueError as exc:
            raise ValueError(f"bad symmetric prior {selector!r}: {exc}") from None
    if kind == "custom" and arg:
        path = Path(arg)
        return read_prior(path.read_text(encoding="utf-8"), dag, source=str(path))
    raise ValueError(f"unknown prior selector {selector!r}")


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_inputs(cfg: RunConfig):
    """Read graph, counts and prior; returns ``(dag, counts, prior, inputs)``."""
    dag = read_graph(cfg.graph_path)
    inputs = {"graph": {"path": str(cfg.graph_path), "sha256": _digest(cfg.graph_path)}}
    if cfg.counts_path is not None:
        path = Path(cfg.counts_path)
        counts = read_counts(path.read_text(encoding="utf-8"), dag, source=str(path))
        inputs["counts"] = {"path": str(path), "sha256": _digest(path)}
    else:
        counts = read_trajectories(cfg.trajectories_path, dag)
        inputs["trajectories"] = {"path": str(cfg.trajectories_path), "sha256": _digest(cfg.trajectories_path)}
    prior = parse_prior(cfg.prior, dag)
    if prior.kind == "custom":
        p = cfg.prior.partition(":")[2]
        inputs["prior"] = {"path": p, "sha256": _digest(p)}
    return dag, counts, prior, inputs


def edge_summaries(posteriors, counts: TransitionCounts, ci_level: float = 0.95) -> list[dict]:
    """Analytic per-edge summaries; single-child edges are reported as certain."""
    rows = []
    for post in posteriors:
        for j, child in enumerate(post.children):
            row = {
                "src": post.parent,
                "dst": child,
                "count": counts[(post.parent, child)],
                "prior_alpha": float(post.prior[j]) if post.prior is not None else None,
                "posterior_alpha": float(post.alpha[j]),
            }
            if post.deterministic:
                row.update(deterministic=True, beta=None, mean=1.0, sd=0.0, ci=[1.0, 1.0])
            else:
                m = beta_marginal(post, child)
                row.update(
                    deterministic=False,
                    beta={"a": m.a, "b": m.b},
                    mean=beta_mean(m),
                    sd=beta_sd(m),
                    ci=list(beta_interval(m, ci_level)),
                )
            rows.append(row)
    return rows


def canned_queries(dag: Dag) -> tuple[Query, ...]:
    """Absorption profile of the source plus every (absorbing, transient) inversion."""
    src = dag.source
    absorbing = dag.absorbing
    transient = [n for n in dag.nodes if n != src and n not in absorbing]
    out = [Query.absorption_profile(src)]
    out += [Query.inverse(s, t) for t in transient for s in absorbing]
    return tuple(out)


def _histogram_name(index: int, query: Query, target: str | None) -> str:
    parts = [f"q{index:02d}", query.kind, *query.nodes]
    if target is not None:
        parts.append(target)
    return "_".join(parts) + ".csv"


def build_report(dag: Dag, counts: TransitionCounts, prior: PriorSpec, sampler: SamplerConfig, queries=(), inputs=None, histogram_dir=None) -> dict:
    """Validate, fit and (if ``queries`` is non-empty) simulate.

    Histogram files are only written when ``histogram_dir`` is given; the
    report then records their paths.
    """
    validation = validate(dag)
    if not validation.ok:
        raise GraphError(str(validation))
    flow = flow_check(counts, dag)
    posteriors = fit_posterior(counts, prior, dag)
    report = {
        "meta": {
            "tool": "dagposterior",
            "version": __version__,
            "seed": int(sampler.seed),
            "M": int(sampler.samples),
            "ci_level": sampler.ci_level,
            "histogram_bins": int(sampler.histogram_bins),
            "scheme": sampler.scheme,
            "prior": prior.describe(),
            "inputs": inputs or {},
        },
        "validation": validation.to_dict(),
        "flow": flow.to_dict(),
        "edges": edge_summaries(posteriors, counts, sampler.ci_level),
        "queries": [],
    }
    if not queries:
        return report
    for q in queries:
        q.check(dag)
    samples = draw_joint(posteriors, sampler)
    pending_files = []
    for i, q in enumerate(queries):
        result = run_query(q, posteriors, dag, sampler, samples)
        items = result.items() if isinstance(result, dict) else [(None, result)]
        for target, summary in items:
            echo = q.to_dict()
            if target is not None:
                echo["absorbing"] = target
            entry = {"query": echo, **summary.to_dict()}
            if histogram_dir is not None:
                path = Path(histogram_dir) / _histogram_name(i, q, target)
                entry["histogram_file"] = str(path)
                pending_files.append((path, summary.histogram_csv()))
            report["queries"].append(entry)
    for path, text in pending_files:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return report


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, allow_nan=False) + "\n"


def _fmt(x):
    return "" if x is None else repr(x) if isinstance(x, float) else str(x)


def edges_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["src", "dst", "count", "prior_alpha", "posterior_alpha", "beta_a", "beta_b", "mean", "sd", "ci_lower", "ci_upper"])
    for e in report["edges"]:
        beta = e["beta"] or {}
        w.writerow([e["src"], e["dst"], e["count"], *map(_fmt, (e["prior_alpha"], e["posterior_alpha"], beta.get("a"), beta.get("b"), e["mean"], e["sd"], *e["ci"]))])
    return buf.getvalue()


def queries_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query", "mean", "sd", "ci_lower", "ci_upper", "M"])
    for q in report["queries"]:
        echo = q["query"]
        label = str(Query.from_dict(echo))
        if "absorbing" in echo:
            label += f"->{echo['absorbing']}"
        w.writerow([label, *map(_fmt, (q["mean"], q["sd"], *q["ci"])), q["M"]])
    return buf.getvalue()

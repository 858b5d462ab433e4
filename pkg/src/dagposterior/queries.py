"""Posterior functionals of transition probabilities.

All functionals take ``theta``, a mapping from edge ``(parent, child)`` to a
transition probability. Values may be floats (one world) or equal-length
arrays (many worlds at once, e.g. :meth:`SampleMatrix.edge_values`); the
arithmetic is elementwise, so both give the same numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .conjugate import NodePosterior
from .errors import GraphError, NumericError
from .graph import DEFAULT_PATH_CAP, Dag, _can_reach, enumerate_paths, topological_order
from .montecarlo import QuerySummary, SampleMatrix, SamplerConfig, draw_joint, summarize

__all__ = [
    "Query",
    "path_probability",
    "forward_reach",
    "inverse_probability",
    "absorption_profile",
    "analytic_forward_mean",
    "evaluate",
    "run_query",
]

KINDS = ("path", "forward", "inverse", "absorption_profile")


@dataclass(frozen=True)
class Query:
    """A posterior functional to evaluate.

    ``nodes`` holds the arguments: the node sequence for ``path``,
    ``(from, to)`` for ``forward``, ``(later, earlier)`` for ``inverse`` and
    ``(from,)`` for ``absorption_profile``.
    """

    kind: str
    nodes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        arity = {"forward": 2, "inverse": 2, "absorption_profile": 1}
        if self.kind not in KINDS:
            raise ValueError(f"unknown query kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "path":
            if not self.nodes:
                raise ValueError("path query needs at least one node")
        elif len(self.nodes) != arity[self.kind]:
            raise ValueError(f"{self.kind} query takes {arity[self.kind]} node(s), got {len(self.nodes)}")

    @classmethod
    def path(cls, *nodes):
        return cls("path", nodes)

    @classmethod
    def forward(cls, start, end):
        return cls("forward", (start, end))

    @classmethod
    def inverse(cls, later, earlier):
        return cls("inverse", (later, earlier))

    @classmethod
    def absorption_profile(cls, start):
        return cls("absorption_profile", (start,))

    @classmethod
    def parse(cls, text: str) -> Query:
        """Parse ``kind:N1:N2...``, e.g. ``inverse:D:I`` or ``path:A:W1:D``."""
        kind, *nodes = text.strip().split(":")
        if kind == "absorption":
            kind = "absorption_profile"
        return cls(kind, tuple(nodes))

    def check(self, dag: Dag) -> None:
        for n in self.nodes:
            dag.check_node(n)

    def to_dict(self) -> dict:
        if self.kind == "path":
            return {"kind": "path", "nodes": list(self.nodes)}
        if self.kind == "forward":
            return {"kind": "forward", "from": self.nodes[0], "to": self.nodes[1]}
        if self.kind == "inverse":
            return {"kind": "inverse", "later": self.nodes[0], "earlier": self.nodes[1]}
        return {"kind": "absorption_profile", "from": self.nodes[0]}

    @classmethod
    def from_dict(cls, d: dict) -> Query:
        kind = d["kind"]
        if kind == "path":
            return cls.path(*d["nodes"])
        if kind == "forward":
            return cls.forward(d["from"], d["to"])
        if kind == "inverse":
            return cls.inverse(d["later"], d["earlier"])
        return cls.absorption_profile(d["from"])

    def __str__(self):
        return f"{self.kind}({','.join(self.nodes)})"


@lru_cache(maxsize=64)
def _reverse_plan(dag: Dag, end: str) -> tuple[tuple[str, tuple[str, ...]], ...]:
    useful = _can_reach(dag, end)
    plan = []
    for v in reversed(topological_order(dag)):
        if v in useful and v != end:
            plan.append((v, tuple(w for w in dag.children[v] if w in useful)))
    return tuple(plan)


def path_probability(theta, path) -> float:
    """Product of transition probabilities along ``path``; 1 for a single node."""
    path = tuple(path)
    if not path:
        raise GraphError("empty path")
    prob = 1.0
    for edge in zip(path, path[1:]):
        if edge not in theta:
            raise GraphError(f"{edge[0]}->{edge[1]} is not an edge")
        prob = prob * theta[edge]
    return prob


def forward_reach(theta, dag: Dag, start: str, end: str):
    """Probability of ever visiting ``end`` when starting at ``start``.

    Dynamic program over reverse topological order:
    ``r(end) = 1`` and ``r(v) = sum_w theta[v, w] * r(w)`` over the children
    that can still reach ``end``. Equals the sum over all connecting paths of
    the path products.
    """
    dag.check_node(start)
    dag.check_node(end)
    if start == end:
        return 1.0
    reach = {end: 1.0}
    for v, kids in _reverse_plan(dag, end):
        total = 0.0
        for w in kids:
            total = total + theta[(v, w)] * reach[w]
        reach[v] = total
        if v == start:
            return total
    return 0.0


def inverse_probability(theta, dag: Dag, later: str, earlier: str):
    """Probability of having visited ``earlier`` given that ``later`` was visited.

    Bayes inversion ``reach(earlier -> later) * reach(src -> earlier) /
    reach(src -> later)``, with all three terms taken from the same world.
    """
    src = dag.source
    den = forward_reach(theta, dag, src, later)
    if np.any(np.asarray(den) == 0):
        raise NumericError(f"{later} is unreachable from {src} in at least one world")
    num = forward_reach(theta, dag, earlier, later) * forward_reach(theta, dag, src, earlier)
    return num / den


def absorption_profile(theta, dag: Dag, start: str) -> dict:
    """Probability of ending in each absorbing node when starting at ``start``."""
    dag.check_node(start)
    return {s: forward_reach(theta, dag, start, s) for s in dag.absorbing}


def analytic_forward_mean(posteriors: list[NodePosterior], dag: Dag, start: str, end: str, cap: int = DEFAULT_PATH_CAP) -> float:
    """Exact posterior mean of :func:`forward_reach`.

    A path visits every parent at most once, so each path product is a
    product of independent Dirichlet coordinates and its expectation is the
    product of their means.
    """
    means = {}
    for post in posteriors:
        for c, mu in zip(post.children, post.mean()):
            means[(post.parent, c)] = float(mu)
    return math.fsum(
        math.prod(means[e] for e in zip(p, p[1:])) for p in enumerate_paths(dag, start, end, cap=cap)
    )


def evaluate(query: Query, theta, dag: Dag):
    """Value of ``query`` under ``theta``; a dict for absorption profiles."""
    query.check(dag)
    if query.kind == "path":
        return path_probability(theta, query.nodes)
    if query.kind == "forward":
        return forward_reach(theta, dag, *query.nodes)
    if query.kind == "inverse":
        return inverse_probability(theta, dag, *query.nodes)
    return absorption_profile(theta, dag, query.nodes[0])


def run_query(query: Query, posteriors, dag: Dag, cfg: SamplerConfig, samples: SampleMatrix | None = None):
    """Summarize the posterior of ``query`` by Monte Carlo.

    Pass ``samples`` to evaluate several queries on one shared draw.
    Returns a :class:`QuerySummary`, or a dict of them keyed by absorbing
    node for ``absorption_profile``.
    """
    if samples is None:
        samples = draw_joint(posteriors, cfg)
    M = samples.samples
    value = evaluate(query, samples.edge_values(), dag)
    if isinstance(value, dict):
        return {k: summarize(np.broadcast_to(v, (M,)), cfg) for k, v in value.items()}
    return summarize(np.broadcast_to(value, (M,)), cfg)

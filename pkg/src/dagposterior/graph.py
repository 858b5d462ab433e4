"""Absorbing directed acyclic graphs: parsing, validation and path analysis.

A graph is written as a plain edge list, one ``SRC DST`` pair per line::

    # admission
    A  I
    A  W1

Blank lines and ``#`` comments are ignored. Nodes are numbered in order of
first mention and edges keep file order; both orders are used downstream to
break ties deterministically (topological order, child order of Dirichlet
blocks, depth-first path order).
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as _FsPath

from .errors import GraphError, ParseError, PathCapExceeded

__all__ = [
    "Dag",
    "NodeClassification",
    "ValidationFailure",
    "ValidationReport",
    "parse_graph",
    "read_graph",
    "validate",
    "classify_nodes",
    "topological_order",
    "enumerate_paths",
    "DEFAULT_PATH_CAP",
]

DEFAULT_PATH_CAP = 10**6

_NODE_RE = re.compile(r"^[A-Za-z0-9_]+$")

Edge = tuple[str, str]
Path = tuple[str, ...]


@dataclass(frozen=True)
class Dag:
    """Immutable node list plus ordered directed edge list.

    Construction does not check acyclicity or connectivity; use
    :func:`validate` for that. Duplicate edges, self-loops and edges that
    mention undeclared nodes are rejected immediately.
    """

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple((str(u), str(v)) for u, v in self.edges))
        if len(set(self.nodes)) != len(self.nodes):
            raise GraphError("duplicate node identifiers")
        known = set(self.nodes)
        seen = set()
        for u, v in self.edges:
            if u not in known or v not in known:
                raise GraphError(f"edge {u}->{v} mentions an undeclared node")
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge {u}->{v}")
            seen.add((u, v))

    @classmethod
    def from_edges(cls, edges) -> Dag:
        """Build a graph whose nodes appear in first-mention order."""
        edges = [tuple(e) for e in edges]
        nodes = list(dict.fromkeys(n for e in edges for n in e))
        return cls(tuple(nodes), tuple(edges))

    @cached_property
    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        out = {n: [] for n in self.nodes}
        for u, v in self.edges:
            out[u].append(v)
        return {n: tuple(c) for n, c in out.items()}

    @cached_property
    def parents(self) -> dict[str, tuple[str, ...]]:
        out = {n: [] for n in self.nodes}
        for u, v in self.edges:
            out[v].append(u)
        return {n: tuple(p) for n, p in out.items()}

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def out_degree(self, node: str) -> int:
        return len(self.children[node])

    def in_degree(self, node: str) -> int:
        return len(self.parents[node])

    @property
    def roots(self) -> tuple[str, ...]:
        return tuple(n for n in self.nodes if not self.parents[n])

    @property
    def source(self) -> str:
        """The unique node with in-degree zero."""
        roots = self.roots
        if len(roots) != 1:
            raise GraphError(f"expected exactly one source node, found {list(roots)}")
        return roots[0]

    @property
    def absorbing(self) -> tuple[str, ...]:
        return tuple(n for n in self.nodes if not self.children[n])

    @property
    def branching(self) -> tuple[str, ...]:
        """Nodes with at least one outgoing edge, in declaration order."""
        return tuple(n for n in self.nodes if self.children[n])

    def check_node(self, node: str) -> None:
        if node not in self.index:
            raise GraphError(f"unknown node {node!r}")

    def to_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges)


@dataclass(frozen=True)
class NodeClassification:
    source: str
    transient: frozenset[str]
    absorbing: frozenset[str]


@dataclass(frozen=True)
class ValidationFailure:
    kind: str
    message: str
    witness: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "witness": list(self.witness)}


@dataclass(frozen=True)
class ValidationReport:
    failures: tuple[ValidationFailure, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.failures

    def kinds(self) -> set[str]:
        return {f.kind for f in self.failures}

    def to_dict(self) -> dict:
        return {"valid": self.ok, "failures": [f.to_dict() for f in self.failures]}

    def __str__(self):
        if self.ok:
            return "graph: valid"
        return "\n".join(f"graph: {f.kind}: {f.message}" for f in self.failures)


def parse_graph(text: str, source: str | None = None) -> Dag:
    """Parse an edge-list document into a :class:`Dag` (no validation)."""
    edges: list[Edge] = []
    seen: dict[Edge, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'SRC DST', got {raw!r}", lineno, source)
        u, v = parts
        for name in parts:
            if not _NODE_RE.match(name):
                raise ParseError(f"invalid node identifier {name!r}", lineno, source)
        if u == v:
            raise ParseError(f"self-loop at {u}", lineno, source)
        if (u, v) in seen:
            raise ParseError(
                f"duplicate edge {u}->{v} (first on line {seen[(u, v)]})", lineno, source
            )
        seen[(u, v)] = lineno
        edges.append((u, v))
    return Dag.from_edges(edges)


def read_graph(path) -> Dag:
    path = _FsPath(path)
    return parse_graph(path.read_text(encoding="utf-8"), source=str(path))


def _find_cycle(dag: Dag) -> tuple[str, ...] | None:
    white, grey, black = 0, 1, 2
    color = {n: white for n in dag.nodes}
    for start in dag.nodes:
        if color[start] != white:
            continue
        stack = [(start, iter(dag.children[start]))]
        trail = [start]
        color[start] = grey
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = black
                stack.pop()
                trail.pop()
            elif color[nxt] == grey:
                return tuple(trail[trail.index(nxt):]) + (nxt,)
            elif color[nxt] == white:
                color[nxt] = grey
                trail.append(nxt)
                stack.append((nxt, iter(dag.children[nxt])))
    return None


def _reachable_from(dag: Dag, start: str) -> set[str]:
    seen = {start}
    todo = [start]
    while todo:
        for w in dag.children[todo.pop()]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def _can_reach(dag: Dag, target: str) -> set[str]:
    seen = {target}
    todo = [target]
    while todo:
        for w in dag.parents[todo.pop()]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def validate(dag: Dag) -> ValidationReport:
    """Run every structural check and collect the failures.

    Checks: acyclicity (with a witness cycle), a unique in-degree-0 source,
    reachability of every node from that source, and a non-empty set of
    absorbing nodes.
    """
    failures = []
    if not dag.nodes:
        failures.append(ValidationFailure("empty", "graph has no nodes"))
        return ValidationReport(tuple(failures))
    cycle = _find_cycle(dag)
    if cycle is not None:
        failures.append(
            ValidationFailure("cycle", "cycle found: " + "->".join(cycle), cycle)
        )
    roots = dag.roots
    if len(roots) != 1:
        what = "no" if not roots else "multiple"
        failures.append(
            ValidationFailure(
                "source",
                f"{what} in-degree-0 nodes: {list(roots)}; exactly one is required",
                roots,
            )
        )
    else:
        unreachable = [n for n in dag.nodes if n not in _reachable_from(dag, roots[0])]
        if unreachable:
            failures.append(
                ValidationFailure(
                    "unreachable",
                    f"nodes not reachable from {roots[0]}: {unreachable}",
                    tuple(unreachable),
                )
            )
    if not dag.absorbing:
        failures.append(ValidationFailure("absorbing", "no absorbing (out-degree 0) node"))
    return ValidationReport(tuple(failures))


def classify_nodes(dag: Dag) -> NodeClassification:
    source = dag.source
    absorbing = frozenset(dag.absorbing)
    transient = frozenset(n for n in dag.nodes if n != source and n not in absorbing)
    return NodeClassification(source, transient, absorbing)


def topological_order(dag: Dag) -> list[str]:
    """Kahn's algorithm; among ready nodes the earliest-declared goes first."""
    indeg = {n: dag.in_degree(n) for n in dag.nodes}
    ready = [dag.index[n] for n in dag.nodes if indeg[n] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        node = dag.nodes[heapq.heappop(ready)]
        order.append(node)
        for w in dag.children[node]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, dag.index[w])
    if len(order) != len(dag.nodes):
        raise GraphError("graph contains a cycle; no topological order exists")
    return order


def enumerate_paths(dag: Dag, start: str, end: str, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """All directed paths from ``start`` to ``end`` in depth-first order.

    Children are explored in edge declaration order. ``start == end`` yields
    the single trivial path. Raises :class:`PathCapExceeded` once more than
    ``cap`` paths have been found.
    """
    dag.check_node(start)
    dag.check_node(end)
    if start == end:
        return [(start,)]
    useful = _can_reach(dag, end)
    if start not in useful:
        return []
    paths: list[Path] = []
    trail = [start]
    stack = [iter(dag.children[start])]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            trail.pop()
        elif nxt == end:
            paths.append(tuple(trail) + (end,))
            if len(paths) > cap:
                raise PathCapExceeded(
                    f"more than {cap} paths from {start} to {end}; use the dynamic program"
                )
        elif nxt in useful:
            if nxt in trail:
                raise GraphError("graph contains a cycle")
            trail.append(nxt)
            stack.append(iter(dag.children[nxt]))
    return paths

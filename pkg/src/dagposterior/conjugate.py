"""Dirichlet-multinomial updates for the outgoing transitions of each node.

Every node with outgoing edges carries a probability vector over its
children. With a Dirichlet prior and multinomial counts the posterior is again
Dirichlet, with parameters ``counts + prior``; each single transition
probability then has a Beta marginal.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import optimize, special

from .errors import GraphError, ParseError
from .graph import Dag

__all__ = [
    "TransitionCounts",
    "PriorSpec",
    "NodePosterior",
    "BetaMarginal",
    "FlowEntry",
    "FlowReport",
    "tally_trajectories",
    "read_counts",
    "read_trajectories",
    "read_prior",
    "flow_check",
    "fit_posterior",
    "beta_marginal",
    "beta_mean",
    "beta_sd",
    "beta_cdf",
    "beta_quantile",
    "beta_interval",
]


@dataclass(frozen=True)
class TransitionCounts:
    """Observed transition tallies ``y[(parent, child)]`` for every edge of ``dag``."""

    dag: Dag
    counts: dict

    def __post_init__(self):
        full = {e: 0 for e in self.dag.edges}
        for edge, y in dict(self.counts).items():
            edge = tuple(edge)
            if edge not in full:
                raise GraphError(f"count given for {edge[0]}->{edge[1]}, which is not an edge")
            if isinstance(y, float) and y.is_integer():
                y = int(y)
            if not isinstance(y, (int, np.integer)) or isinstance(y, bool) or y < 0:
                raise ValueError(f"count for {edge[0]}->{edge[1]} must be a non-negative integer, got {y!r}")
            full[edge] = int(y)
        object.__setattr__(self, "counts", full)

    @classmethod
    def zeros(cls, dag: Dag) -> TransitionCounts:
        return cls(dag, {})

    def __getitem__(self, edge) -> int:
        return self.counts[tuple(edge)]

    def total(self, parent: str) -> int:
        """``n_i``: number of departures observed from ``parent``."""
        return sum(self.counts[(parent, c)] for c in self.dag.children[parent])

    def inflow(self, node: str) -> int:
        return sum(self.counts[(p, node)] for p in self.dag.parents[node])

    def vector(self, parent: str) -> np.ndarray:
        return np.array([self.counts[(parent, c)] for c in self.dag.children[parent]], dtype=np.int64)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["src", "dst", "count"])
        for (u, v), y in self.counts.items():
            w.writerow([u, v, y])
        return buf.getvalue()


@dataclass(frozen=True)
class PriorSpec:
    """Dirichlet prior selector.

    ``perks`` splits one unit of prior mass equally among the children of
    each node (``1/J`` each); ``symmetric`` puts ``concentration`` on every
    edge; ``custom`` takes explicit per-edge values.
    """

    kind: str = "perks"
    concentration: float | None = None
    alphas: dict | None = None

    def __post_init__(self):
        if self.kind not in ("perks", "symmetric", "custom"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.kind == "symmetric":
            if self.concentration is None or not self.concentration > 0:
                raise ValueError("symmetric prior needs a concentration > 0")
        if self.kind == "custom":
            if self.alphas is None:
                raise ValueError("custom prior needs per-edge alphas")
            alphas = {tuple(k): float(a) for k, a in self.alphas.items()}
            bad = [k for k, a in alphas.items() if not a > 0 or not math.isfinite(a)]
            if bad:
                raise ValueError(f"custom prior values must be finite and > 0: {bad}")
            object.__setattr__(self, "alphas", alphas)

    @classmethod
    def perks(cls) -> PriorSpec:
        return cls("perks")

    @classmethod
    def symmetric(cls, c: float) -> PriorSpec:
        return cls("symmetric", concentration=float(c))

    @classmethod
    def custom(cls, alphas) -> PriorSpec:
        return cls("custom", alphas=dict(alphas))

    def alpha(self, dag: Dag, parent: str) -> np.ndarray:
        children = dag.children[parent]
        if self.kind == "perks":
            return np.full(len(children), 1.0 / len(children))
        if self.kind == "symmetric":
            return np.full(len(children), self.concentration)
        missing = [(parent, c) for c in children if (parent, c) not in self.alphas]
        if missing:
            raise GraphError(f"custom prior has no entry for edges {missing}")
        return np.array([self.alphas[(parent, c)] for c in children])

    def describe(self) -> str:
        if self.kind == "symmetric":
            return f"symmetric:{self.concentration!r}"
        return self.kind


@dataclass(frozen=True)
class NodePosterior:
    """Posterior Dirichlet ``Di(alpha)`` over the children of ``parent``."""

    parent: str
    children: tuple[str, ...]
    alpha: np.ndarray
    prior: np.ndarray | None = None

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        alpha.flags.writeable = False
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "children", tuple(self.children))
        if alpha.shape != (len(self.children),):
            raise ValueError("alpha must have one entry per child")
        if not np.all(alpha > 0):
            raise ValueError(f"posterior parameters at {self.parent} must be > 0")

    @property
    def deterministic(self) -> bool:
        return len(self.children) == 1

    def mean(self) -> np.ndarray:
        return self.alpha / self.alpha.sum()

    def position(self, child: str) -> int:
        try:
            return self.children.index(child)
        except ValueError:
            raise GraphError(f"{child!r} is not a child of {self.parent!r}") from None


@dataclass(frozen=True)
class BetaMarginal:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"Beta parameters must be positive, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class FlowEntry:
    node: str
    inflow: int
    outflow: int

    @property
    def balanced(self) -> bool:
        return self.inflow == self.outflow

    def to_dict(self) -> dict:
        return {"node": self.node, "inflow": self.inflow, "outflow": self.outflow, "balanced": self.balanced}


@dataclass(frozen=True)
class FlowReport:
    source: str
    cohort_size: int
    nodes: tuple[FlowEntry, ...]
    absorbed: int

    @property
    def warnings(self) -> list[str]:
        return [
            f"{e.node}: inflow {e.inflow} != outflow {e.outflow} (possible censoring)"
            for e in self.nodes
            if not e.balanced
        ]

    @property
    def balanced(self) -> bool:
        return all(e.balanced for e in self.nodes)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "cohort_size": self.cohort_size,
            "absorbed": self.absorbed,
            "nodes": [e.to_dict() for e in self.nodes],
            "warnings": self.warnings,
        }

    def __str__(self):
        lines = [f"flow: source {self.source} cohort size {self.cohort_size}"]
        for e in self.nodes:
            state = "balanced" if e.balanced else "WARNING imbalance"
            lines.append(f"flow: {e.node}: inflow {e.inflow}, outflow {e.outflow}, {state}")
        return "\n".join(lines)


def _data_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def tally_trajectories(lines, dag: Dag, source: str | None = None) -> TransitionCounts:
    """Count consecutive transitions in comma-separated node sequences.

    ``lines`` is either one string or an iterable of lines. Every trajectory
    must start at the graph source and finish in an absorbing node.
    """
    text = lines if isinstance(lines, str) else "\n".join(lines)
    root = dag.source
    absorbing = set(dag.absorbing)
    counts = {e: 0 for e in dag.edges}
    for lineno, line in _data_lines(text):
        seq = [s.strip() for s in line.split(",")]
        for node in seq:
            if node not in dag.index:
                raise ParseError(f"unknown node {node!r}", lineno, source)
        if seq[0] != root:
            raise ParseError(f"trajectory starts at {seq[0]}, not at source {root}", lineno, source)
        if seq[-1] not in absorbing:
            raise ParseError(f"trajectory ends at {seq[-1]}, which is not absorbing", lineno, source)
        for u, v in zip(seq, seq[1:]):
            if (u, v) not in counts:
                raise ParseError(f"transition {u}->{v} is not an edge of the graph", lineno, source)
            counts[(u, v)] += 1
    return TransitionCounts(dag, counts)


def _read_csv_rows(text, header, source):
    rows = [(n, line) for n, line in _data_lines(text)]
    if not rows:
        return []
    lineno, first = rows[0]
    got = [h.strip() for h in first.split(",")]
    if got != header:
        raise ParseError(f"expected header {','.join(header)!r}, got {first!r}", lineno, source)
    out = []
    for lineno, line in rows[1:]:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", lineno, source)
        out.append((lineno, cells))
    return out


def read_counts(text: str, dag: Dag, source: str | None = None) -> TransitionCounts:
    """Parse a ``src,dst,count`` CSV; edges not listed default to zero."""
    counts = {}
    for lineno, (u, v, y) in _read_csv_rows(text, ["src", "dst", "count"], source):
        if (u, v) not in dag.edge_set:
            raise ParseError(f"counts for {u}->{v}, which is not an edge of the graph", lineno, source)
        if (u, v) in counts:
            raise ParseError(f"duplicate row for {u}->{v}", lineno, source)
        try:
            value = int(y)
        except ValueError:
            raise ParseError(f"count {y!r} is not an integer", lineno, source) from None
        if value < 0:
            raise ParseError(f"negative count {value}", lineno, source)
        counts[(u, v)] = value
    return TransitionCounts(dag, counts)


def read_trajectories(path, dag: Dag) -> TransitionCounts:
    path = Path(path)
    return tally_trajectories(path.read_text(encoding="utf-8"), dag, source=str(path))


def read_prior(text: str, dag: Dag, source: str | None = None) -> PriorSpec:
    """Parse a ``src,dst,alpha`` CSV into a custom prior."""
    alphas = {}
    for lineno, (u, v, a) in _read_csv_rows(text, ["src", "dst", "alpha"], source):
        if (u, v) not in dag.edge_set:
            raise ParseError(f"prior for {u}->{v}, which is not an edge of the graph", lineno, source)
        try:
            value = float(a)
        except ValueError:
            raise ParseError(f"alpha {a!r} is not a number", lineno, source) from None
        if not value > 0 or not math.isfinite(value):
            raise ParseError(f"alpha must be finite and > 0, got {a}", lineno, source)
        alphas[(u, v)] = value
    return PriorSpec.custom(alphas)


def flow_check(counts: TransitionCounts, dag: Dag | None = None) -> FlowReport:
    """Compare inflow and outflow at every transient node.

    An imbalance is reported, never raised: open cohorts lose people to
    censoring and transfers.
    """
    dag = dag or counts.dag
    root = dag.source
    absorbing = set(dag.absorbing)
    entries = tuple(
        FlowEntry(n, counts.inflow(n), counts.total(n))
        for n in dag.nodes
        if n != root and n not in absorbing
    )
    absorbed = sum(counts.inflow(n) for n in dag.absorbing)
    return FlowReport(root, counts.total(root), entries, absorbed)


def fit_posterior(counts: TransitionCounts, prior: PriorSpec | None = None, dag: Dag | None = None) -> list[NodePosterior]:
    """Conjugate update: one ``Di(y_i + alpha_i)`` per node with children."""
    dag = dag or counts.dag
    prior = prior or PriorSpec.perks()
    out = []
    for parent in dag.branching:
        a0 = prior.alpha(dag, parent)
        out.append(NodePosterior(parent, dag.children[parent], counts.vector(parent) + a0, prior=a0))
    return out


def beta_marginal(posterior: NodePosterior, child: str) -> BetaMarginal:
    """Beta marginal of one coordinate of a Dirichlet posterior.

    Undefined for single-child nodes, whose transition is certain.
    """
    j = posterior.position(child)
    if posterior.deterministic:
        raise ValueError(f"{posterior.parent}->{child} is the only transition; it has probability 1")
    a = float(posterior.alpha[j])
    return BetaMarginal(a, float(posterior.alpha.sum()) - a)


def beta_mean(m: BetaMarginal) -> float:
    return m.a / (m.a + m.b)


def beta_sd(m: BetaMarginal) -> float:
    s = m.a + m.b
    return math.sqrt(m.a * m.b / (s * s * (s + 1.0)))


def beta_cdf(m: BetaMarginal, x):
    """Regularized incomplete beta ``I_x(a, b)``."""
    return special.betainc(m.a, m.b, x)


def beta_quantile(m: BetaMarginal, p: float) -> float:
    """Solve ``I_x(a, b) = p`` for ``x`` with Brent's bracketing root finder.

    The tolerance is relative (a few ulps of ``x``) rather than absolute:
    for small shapes the CDF is very steep near zero, and an absolute
    tolerance there would leave ``I_x`` far from ``p``.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {p}")
    x = optimize.brentq(
        lambda x: special.betainc(m.a, m.b, x) - p,
        0.0,
        1.0,
        xtol=1e-300,
        rtol=4 * np.finfo(float).eps,
        maxiter=1000,
    )
    # brentq stops within a few ulps of the crossing; step toward it while
    # the residual keeps shrinking
    f = special.betainc(m.a, m.b, x) - p
    toward = 0.0 if f > 0 else 1.0
    for _ in range(16):
        y = np.nextafter(x, toward)
        g = special.betainc(m.a, m.b, y) - p
        if abs(g) >= abs(f):
            break
        x, f = y, g
    return float(x)


def beta_interval(m: BetaMarginal, level: float = 0.95) -> tuple[float, float]:
    tail = (1.0 - level) / 2.0
    return beta_quantile(m, tail), beta_quantile(m, 1.0 - tail)

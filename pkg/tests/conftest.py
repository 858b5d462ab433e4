import numpy as np
import pytest

from dagposterior.conjugate import NodePosterior, fit_posterior
from dagposterior.datasets import pidirac, pidirac_counts_path, pidirac_graph_path
from dagposterior.graph import Dag

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def pidirac_data():
    return pidirac()


@pytest.fixture(scope="session")
def pidirac_dag(pidirac_data):
    return pidirac_data[0]


@pytest.fixture(scope="session")
def pidirac_counts(pidirac_data):
    return pidirac_data[1]


@pytest.fixture(scope="session")
def pidirac_posteriors(pidirac_counts):
    return fit_posterior(pidirac_counts)


@pytest.fixture(scope="session")
def bundle_paths():
    return str(pidirac_graph_path()), str(pidirac_counts_path())


def random_dag(rng, n_nodes, edge_prob=0.5):
    """Random single-source DAG on nodes N0..N{n-1}; every node reachable from N0.

    Edges only go from lower to higher index. Each non-source node gets at
    least one parent, and nodes are shuffled in the declaration order so that
    declaration order and topological order differ.
    """
    names = [f"N{i}" for i in range(n_nodes)]
    edges = []
    for k in range(1, n_nodes):
        parents = [i for i in range(k) if rng.random() < edge_prob]
        if not parents:
            parents = [int(rng.integers(k))]
        edges += [(names[i], names[k]) for i in parents]
    order = list(rng.permutation(len(edges)))
    edges = [edges[i] for i in order]
    node_order = [names[i] for i in rng.permutation(n_nodes)]
    return Dag(tuple(node_order), tuple(edges))


def random_posteriors(rng, dag):
    return [
        NodePosterior(p, dag.children[p], rng.uniform(0.2, 20.0, size=len(dag.children[p])))
        for p in dag.branching
    ]


def random_theta(rng, dag):
    theta = {}
    for p in dag.branching:
        kids = dag.children[p]
        row = rng.dirichlet(np.full(len(kids), 1.5)) if len(kids) > 1 else np.ones(1)
        theta.update({(p, c): float(v) for c, v in zip(kids, row)})
    return theta


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Bundled example data: the PIDIRAC severe-influenza hospital cohort.

1306 admitted patients, 2017-18 season, 14 Catalan hospitals. The graph has
admission ``A``, transient states ``I`` (ICU), ``W1`` and ``W2`` (wards) and
absorbing outcomes ``D`` (death), ``H`` (home) and ``L`` (long-term care).
"""

from importlib import resources

from .conjugate import TransitionCounts, read_counts
from .graph import Dag, parse_graph

__all__ = ["pidirac_graph_path", "pidirac_counts_path", "pidirac"]


def pidirac_graph_path():
    return resources.files("dagposterior") / "data" / "pidirac_graph.txt"


def pidirac_counts_path():
    return resources.files("dagposterior") / "data" / "pidirac_counts.csv"


def pidirac() -> tuple[Dag, TransitionCounts]:
    dag = parse_graph(pidirac_graph_path().read_text(encoding="utf-8"))
    counts = read_counts(pidirac_counts_path().read_text(encoding="utf-8"), dag)
    return dag, counts

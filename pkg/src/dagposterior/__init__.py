"""Bayesian inference of transition probabilities on absorbing DAGs.

Counts of observed transitions give Dirichlet posteriors per node
(:mod:`dagposterior.conjugate`); joint posterior draws
(:mod:`dagposterior.montecarlo`) are pushed through path, reachability,
absorption and Bayes-inverted functionals (:mod:`dagposterior.queries`).
"""

__version__ = "0.1.0"

from .conjugate import (  # noqa: E402
    BetaMarginal,
    NodePosterior,
    PriorSpec,
    TransitionCounts,
    beta_interval,
    beta_marginal,
    beta_mean,
    beta_quantile,
    beta_sd,
    fit_posterior,
    flow_check,
    read_counts,
    tally_trajectories,
)
from .graph import (  # noqa: E402
    Dag,
    classify_nodes,
    enumerate_paths,
    parse_graph,
    read_graph,
    topological_order,
    validate,
)
from .montecarlo import QuerySummary, SampleMatrix, SamplerConfig, draw_joint, summarize  # noqa: E402
from .queries import (  # noqa: E402
    Query,
    absorption_profile,
    analytic_forward_mean,
    forward_reach,
    inverse_probability,
    path_probability,
    run_query,
)

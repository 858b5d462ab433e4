"""Direct transitions on the hospital pathway.

Fits the Dirichlet posterior at every branching node of the bundled
admission/ward/ICU data and prints each edge's Beta marginal with its mean
and 95% equal-tailed interval.

    python demos/01_direct_transitions.py
"""
from dagposterior import datasets
from dagposterior.conjugate import beta_interval, beta_marginal, beta_mean, fit_posterior, flow_check

dag, counts = datasets.pidirac()
print(flow_check(counts, dag))
print()

posteriors = fit_posterior(counts)  # Perks prior: 1/J per child
print(f"{'edge':<8} {'count':>5} {'alpha':>9} {'mean':>8}   95% interval")
for post in posteriors:
    for child, alpha in zip(post.children, post.alpha):
        m = beta_marginal(post, child)
        lo, hi = beta_interval(m)
        edge = f"{post.parent}->{child}"
        print(f"{edge:<8} {counts[(post.parent, child)]:>5} {alpha:>9.4f} {beta_mean(m):>8.4f}   ({lo:.4f}, {hi:.4f})")

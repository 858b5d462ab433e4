"""Where do admitted patients end up?

Samples the joint posterior of all transition probabilities and propagates
each draw through the graph to get the probability of ending at home (H),
dead (D) or in long-term care (L). The exact posterior means, available in
closed form because every path visits a node at most once, are printed
alongside for comparison.

Pass ``--plot`` to draw the three posterior densities (needs matplotlib).

    python demos/02_absorption.py [--plot]
"""
import sys

import numpy as np

from dagposterior import datasets
from dagposterior.conjugate import fit_posterior
from dagposterior.montecarlo import SamplerConfig, draw_joint
from dagposterior.queries import Query, absorption_profile, analytic_forward_mean, run_query

dag, counts = datasets.pidirac()
posteriors = fit_posterior(counts)
cfg = SamplerConfig(samples=100_000, seed=1)
samples = draw_joint(posteriors, cfg)

profile = run_query(Query.absorption_profile("A"), posteriors, dag, cfg, samples=samples)
for state, s in profile.items():
    exact = analytic_forward_mean(posteriors, dag, "A", state)
    print(f"A -> {state}: mean {s.mean:.4f} (exact {exact:.4f}), sd {s.sd:.4f}, 95% CI ({s.ci[0]:.4f}, {s.ci[1]:.4f})")

# each sampled world is a proper distribution over outcomes
theta = samples.edge_values()
total = sum(absorption_profile(theta, dag, "A").values())
print(f"largest deviation of H+D+L from 1 over {cfg.samples} draws: {np.abs(total - 1).max():.1e}")

if "--plot" in sys.argv:
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 3, figsize=(11, 3))
    for ax, (state, s) in zip(axes, profile.items()):
        left = [h[0] for h in s.histogram]
        width = [h[1] - h[0] for h in s.histogram]
        ax.bar(left, [h[2] for h in s.histogram], width=width, align="edge")
        ax.set_title(f"A -> {state}")
    fig.tight_layout()
    plt.show()

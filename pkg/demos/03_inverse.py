"""Looking backwards: given the outcome, was the patient in intensive care?

For each absorbing outcome s the inverse probability
``P(visited I | ended at s)`` is computed draw by draw with Bayes' rule and
summarized. Patients who died passed through the ICU far more often than
those discharged home.

    python demos/03_inverse.py
"""
from dagposterior import datasets
from dagposterior.conjugate import fit_posterior
from dagposterior.montecarlo import SamplerConfig, draw_joint
from dagposterior.queries import Query, run_query

dag, counts = datasets.pidirac()
posteriors = fit_posterior(counts)
cfg = SamplerConfig(samples=100_000, seed=3)
samples = draw_joint(posteriors, cfg)

for earlier in ("I", "W1", "W2"):
    for outcome in dag.absorbing:
        s = run_query(Query.inverse(outcome, earlier), posteriors, dag, cfg, samples=samples)
        print(f"P(visited {earlier:<2} | {outcome}) = {s.mean:.3f}  95% CI ({s.ci[0]:.3f}, {s.ci[1]:.3f})")
    print()

# ICU exposure is a different question from the direct ICU->D edge
direct = run_query(Query.path("I", "D"), posteriors, dag, cfg, samples=samples)
print(f"direct I->D transition: {direct.mean:.3f}")

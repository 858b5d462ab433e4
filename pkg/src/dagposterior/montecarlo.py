"""Joint posterior draws of all transition probabilities, and their summaries.

Each node's probability vector is drawn from its Dirichlet posterior by
normalizing independent Gamma variates. Gamma variates come from a
Marsaglia-Tsang rejection sampler (with the usual ``U**(1/a)`` boost for
shapes below one) fed by Philox counters keyed on ``seed`` and addressed by
``(sample, parent, child, attempt)``. Row ``m`` of a block therefore depends
only on ``(seed, parent, m)``: splitting the work across chunks or threads
gives bit-identical results.

``scheme="beta-marginals"`` instead draws every edge independently from its
Beta marginal. Rows then no longer sum to one; the option exists to
reproduce analyses that used that simpler construction.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conjugate import NodePosterior
from .philox import uniform_pair

__all__ = [
    "SamplerConfig",
    "SampleMatrix",
    "QuerySummary",
    "standard_gamma_log",
    "draw_joint",
    "summarize",
]

_TWO_PI = 2.0 * math.pi
_MAX_SAMPLES = 2**32
_MAX_WIDTH = 2**16
_MARGINAL_STREAM = 2**15
SCHEMES = ("dirichlet", "beta-marginals")
_TINY = np.finfo(float).tiny
_BELOW_ONE = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class SamplerConfig:
    """Monte-Carlo settings.

    ``workers`` only controls parallelism; it never changes results and is
    therefore not part of any report.
    """

    samples: int = 100_000
    seed: int = 0
    ci_level: float = 0.95
    histogram_bins: int = 100
    scheme: str = "dirichlet"
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        if not 1 <= int(self.samples) < _MAX_SAMPLES:
            raise ValueError(f"samples must be in [1, 2**32), got {self.samples}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if int(self.histogram_bins) < 1:
            raise ValueError("histogram_bins must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")

    @property
    def key(self) -> tuple[int, int]:
        s = int(self.seed)
        return s & 0xFFFFFFFF, s >> 32

    @property
    def quantile_probs(self) -> tuple[float, float]:
        tail = (1.0 - self.ci_level) / 2.0
        return tail, 1.0 - tail


def standard_gamma_log(shape, sample_index, stream, key):
    """Log of standard Gamma variates, one row per sample index.

    Parameters
    ----------
    shape : array_like, shape (J,)
        Gamma shape parameters, all > 0.
    sample_index : array_like of int, shape (n,)
        Global sample indices ``m``; row ``r`` of the result depends only on
        ``(key, stream, sample_index[r])``.
    stream : int
        Stream identifier (the parent block), ``0 <= stream < 2**16``.
    key : tuple of two 32-bit ints

    Returns
    -------
    ndarray, shape (n, J)
    """
    alpha = np.asarray(shape, dtype=float)
    if np.any(~(alpha > 0)):
        raise ValueError("Gamma shapes must be > 0")
    if len(alpha) >= _MAX_WIDTH or not 0 <= stream < _MAX_WIDTH:
        raise ValueError("stream and block width must be < 2**16")
    idx = np.asarray(sample_index, dtype=np.uint64)
    n, width = len(idx), len(alpha)

    boosted = alpha < 1.0
    a = np.where(boosted, alpha + 1.0, alpha)
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)

    m_flat = np.repeat(idx, width)
    j_flat = np.tile(np.arange(width, dtype=np.uint64), n)
    lane = (np.uint64(stream) << np.uint64(16)) | j_flat
    d_flat = np.tile(d, n)
    c_flat = np.tile(c, n)

    log_g = np.empty(n * width)
    boost_u = np.empty(n * width)
    pending = np.arange(n * width)
    attempt = 0
    with np.errstate(invalid="ignore", divide="ignore"):
        while pending.size:
            mm, ll = m_flat[pending], lane[pending]
            u1, u2 = uniform_pair((mm, ll, attempt, 0), key)
            u, ub = uniform_pair((mm, ll, attempt, 1), key)
            x = np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)
            dd, cc = d_flat[pending], c_flat[pending]
            v = 1.0 + cc * x
            v = v * v * v
            log_v = np.log(v)
            ok = (v > 0) & (np.log(u) < 0.5 * x * x + dd - dd * v + dd * log_v)
            hit = pending[ok]
            log_g[hit] = np.log(dd[ok]) + log_v[ok]
            boost_u[hit] = ub[ok]
            pending = pending[~ok]
            attempt += 1

    log_g = log_g.reshape(n, width)
    if boosted.any():
        log_g += np.where(boosted, np.log(boost_u.reshape(n, width)) / alpha, 0.0)
    return log_g


def _dirichlet_rows(alpha, sample_index, stream, key):
    if len(alpha) == 1:
        return np.ones((len(sample_index), 1))
    log_g = standard_gamma_log(alpha, sample_index, stream, key)
    log_g -= log_g.max(axis=1, keepdims=True)
    g = np.exp(log_g)
    # keep coordinates strictly inside (0, 1); moves an entry by at most one ulp
    return np.clip(g / g.sum(axis=1, keepdims=True), _TINY, _BELOW_ONE)


def _beta_marginal_rows(alpha, sample_index, stream, key):
    if len(alpha) == 1:
        return np.ones((len(sample_index), 1))
    rest = alpha.sum() - alpha
    log_g = standard_gamma_log(np.concatenate([alpha, rest]), sample_index, stream | _MARGINAL_STREAM, key)
    width = len(alpha)
    # G_a / (G_a + G_b) computed as a logistic of the log-ratio
    return np.clip(1.0 / (1.0 + np.exp(log_g[:, width:] - log_g[:, :width])), _TINY, _BELOW_ONE)


@dataclass(frozen=True)
class SampleMatrix:
    """``M`` joint posterior draws; row ``m`` of every block is one world."""

    parents: tuple[str, ...]
    children: dict
    blocks: dict

    @property
    def samples(self) -> int:
        return next(iter(self.blocks.values())).shape[0] if self.blocks else 0

    def block(self, parent: str) -> np.ndarray:
        return self.blocks[parent]

    def column(self, parent: str, child: str) -> np.ndarray:
        return self.blocks[parent][:, self.children[parent].index(child)]

    def edge_values(self) -> dict:
        """Map each edge ``(parent, child)`` to its length-``M`` column."""
        return {
            (p, c): self.blocks[p][:, j]
            for p in self.parents
            for j, c in enumerate(self.children[p])
        }

    def row(self, m: int) -> dict:
        """Edge probabilities of sample ``m`` as plain floats."""
        return {
            (p, c): float(self.blocks[p][m, j])
            for p in self.parents
            for j, c in enumerate(self.children[p])
        }


def draw_joint(posteriors: list[NodePosterior], cfg: SamplerConfig) -> SampleMatrix:
    """Draw ``cfg.samples`` joint worlds from independent Dirichlet posteriors.

    The stream of each block is its position in ``posteriors``, so keep the
    order produced by :func:`~dagposterior.conjugate.fit_posterior`.
    """
    if len(posteriors) >= _MARGINAL_STREAM:
        raise ValueError("too many parent blocks")
    rows = _dirichlet_rows if cfg.scheme == "dirichlet" else _beta_marginal_rows
    key = cfg.key
    M = int(cfg.samples)
    workers = max(1, min(int(cfg.workers), M))
    bounds = np.linspace(0, M, workers + 1).astype(np.int64)
    chunks = [np.arange(lo, hi, dtype=np.uint64) for lo, hi in zip(bounds, bounds[1:])]

    def run(chunk):
        return [rows(p.alpha, chunk, s, key) for s, p in enumerate(posteriors)]

    if workers == 1:
        parts = [run(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))

    blocks = {}
    for s, p in enumerate(posteriors):
        arr = np.concatenate([part[s] for part in parts], axis=0)
        arr.flags.writeable = False
        blocks[p.parent] = arr
    return SampleMatrix(
        tuple(p.parent for p in posteriors),
        {p.parent: p.children for p in posteriors},
        blocks,
    )


@dataclass(frozen=True)
class QuerySummary:
    mean: float
    sd: float
    ci: tuple[float, float]
    quantile_probs: tuple[float, float]
    histogram: tuple[tuple[float, float, int], ...]
    M: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "sd": None if math.isnan(self.sd) else self.sd,
            "ci": list(self.ci),
            "quantile_probs": list(self.quantile_probs),
            "M": self.M,
        }

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "count"])
        for lo, hi, k in self.histogram:
            w.writerow([repr(lo), repr(hi), k])
        return buf.getvalue()


def _histogram(values, bins):
    lo, hi = float(values.min()), float(values.max())
    # a spread of a few ulps (a query that is constant up to rounding)
    # cannot hold distinct bin edges; collapse to one bin
    if np.any(np.diff(np.linspace(lo, hi, bins + 1)) <= 0):
        return ((lo, hi, int(values.size)),)
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    return tuple((float(a), float(b), int(k)) for a, b, k in zip(edges[:-1], edges[1:], counts))


def summarize(values, cfg: SamplerConfig | None = None) -> QuerySummary:
    """Mean, sample sd, equal-tailed interval and histogram of scalar draws.

    Interval endpoints interpolate linearly between order statistics at
    zero-based rank ``q * (M - 1)``. Histogram bins span ``[min, max]`` and
    are right-open except for the last one. ``sd`` is NaN when ``M == 1``.
    """
    cfg = cfg or SamplerConfig()
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    probs = cfg.quantile_probs
    lo, hi = np.quantile(x, probs, method="linear")
    sd = float(np.std(x, ddof=1)) if x.size > 1 else math.nan
    return QuerySummary(
        mean=float(np.mean(x)),
        sd=sd,
        ci=(float(lo), float(hi)),
        quantile_probs=probs,
        histogram=_histogram(x, int(cfg.histogram_bins)),
        M=int(x.size),
    )

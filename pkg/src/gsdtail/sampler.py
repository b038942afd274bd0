"""Exact simulation of SD / GSD vectors and Monte Carlo tail estimates.

Streams are derived from (seed, stream id) through ``SeedSequence`` so
estimates are bit-reproducible and chunks can be generated independently.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .errors import ArgumentError, InsufficientSamplesError, UnsupportedCaseError

CHUNK = 1_000_000


def make_rng(seed, stream=0):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream),)))


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0

    def generator(self):
        return make_rng(self.seed, self.stream)

    def child(self, offset):
        return RngStream(self.seed, self.stream * 1_000_003 + offset + 1)


def log_gamma_variates(rng, shape, size):
    """log of Gamma(shape, 1) draws; shapes below 1 use G(a+1) * V**(1/a) to avoid underflow."""
    shape = np.asarray(shape, dtype=float)
    out = np.empty(size)
    small = shape < 1.0
    boosted = np.where(small, shape + 1.0, shape)
    g = rng.gamma(np.broadcast_to(boosted, size))
    out[...] = np.log(g)
    if np.any(small):
        v = rng.random(size)
        corr = np.log(v) / np.where(small, shape, 1.0)
        out += np.where(small, corr, 0.0)
    return out


def sample_sd(alpha, rng, n):
    """n draws of U ~ SD(k, alpha): U_i = S_i sqrt(G_i / sum G) with G_i ~ Gamma(alpha_i) and fair signs."""
    a = np.asarray(getattr(alpha, "alpha", alpha), dtype=float)
    if a.ndim != 1 or np.any(a <= 0):
        raise ArgumentError("alpha must be a vector of positive reals")
    n = int(n)
    log_g = log_gamma_variates(rng, a, (n, a.size))
    log_sq = log_g - logsumexp(log_g, axis=1, keepdims=True)
    signs = np.where(rng.random((n, a.size)) < 0.5, -1.0, 1.0)
    return signs * np.exp(0.5 * log_sq)


def sample_radius(law, rng, n):
    if not hasattr(law, "sample"):
        raise UnsupportedCaseError("radial law has no sampler")
    return law.sample(rng, int(n))


def sample_gsd(spec, rng, n):
    """n draws of X = R A^T U."""
    R = sample_radius(spec.radial, rng, n)
    U = sample_sd(spec.alpha, rng, n)
    return R[:, None] * (U @ spec.mixing.A)


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    n_samples: int
    estimator: str
    seed: int
    hits: int
    log_p_hat: float = -math.inf
    log_weight: float = 0.0
    no_hits: bool = False
    upper_bound: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def rel_std_err(self):
        return self.std_err / self.p_hat if self.p_hat > 0 else math.inf

    def to_dict(self):
        return {
            "p_hat": self.p_hat,
            "log_p_hat": None if math.isinf(self.log_p_hat) else self.log_p_hat,
            "std_err": self.std_err,
            "rel_std_err": None if math.isinf(self.rel_std_err) else self.rel_std_err,
            "n_samples": self.n_samples,
            "hits": self.hits,
            "estimator": self.estimator,
            "seed": self.seed,
            "no_hits": self.no_hits,
            "upper_bound": self.upper_bound,
            **self.extra,
        }


def tilt_radius(spec, threshold):
    """Smallest radius that can reach {x > threshold}: sqrt(min x^T Sigma^-1 x over x >= threshold).

    Coordinates with threshold -inf are unconstrained and drop out through the
    marginal block Sigma_FF.
    """
    from .qp import QpProblem, solve

    t = np.asarray(threshold, dtype=float)
    if not np.any(t > 0):
        return 0.0
    F = np.flatnonzero(np.isfinite(t))
    return solve(QpProblem(spec.mixing.Sigma[np.ix_(F, F)], t[F])).norm_bI


def _hits_over_chunks(spec, T, n, seed, r0, stream_base=0):
    """Total hits for each threshold row of T; R is drawn from the law restricted to R > r0."""
    A = spec.mixing.A
    law = spec.radial
    hits = np.zeros(np.atleast_2d(T).shape[0], dtype=np.int64)
    log_p0 = 0.0
    done, stream = 0, stream_base
    while done < n:
        m = min(CHUNK, n - done)
        rng = make_rng(seed, stream)
        if r0 > 0:
            R, log_p0 = law.sample_tail(rng, m, r0)
        else:
            R = sample_radius(law, rng, m)
        U = sample_sd(spec.alpha, rng, m)
        hits += kernels.tail_hits(R, U, A, T)
        done += m
        stream += 1
    return hits, log_p0


def mc_tail(spec, b, u, n, seed=0, estimator="crude", delta=0.2, threshold=None):
    """Estimate P(X > u b) (or P(X > threshold) when given).

    ``tilt`` draws R from its law conditioned on R > (1 - delta) r_min, where
    r_min is the smallest radius that can reach the event, and reweights by
    Fbar(r0). U is never tilted.
    """
    if estimator not in ("crude", "tilt"):
        raise ArgumentError("estimator must be 'crude' or 'tilt'")
    n = int(n)
    if n < 1000:
        raise ArgumentError("n must be at least 1000")
    if threshold is None:
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if b.shape != (spec.k,):
            raise ArgumentError(f"b must have {spec.k} entries")
        if u < 0:
            raise ArgumentError("u must be non-negative")
        t = float(u) * b
    else:
        t = np.atleast_1d(np.asarray(threshold, dtype=float))
        if t.shape != (spec.k,):
            raise ArgumentError(f"threshold must have {spec.k} entries")
    if not 0.0 <= delta < 1.0:
        raise ArgumentError("delta must lie in [0, 1)")
    r0 = 0.0
    if estimator == "tilt" and np.any(t > 0):
        r0 = (1.0 - delta) * tilt_radius(spec, t)
    hits, log_p0 = _hits_over_chunks(spec, t[None, :], n, seed, r0)
    h = int(hits[0])
    frac = h / n
    weight = math.exp(log_p0)
    extra = {"r0": r0} if estimator == "tilt" else {}
    if h == 0:
        return McEstimate(0.0, 0.0, n, estimator, seed, 0, -math.inf, log_p0, True, weight * 3.0 / n, extra)
    p = weight * frac
    se = weight * math.sqrt(frac * (1.0 - frac) / n)
    return McEstimate(p, se, n, estimator, seed, h, log_p0 + math.log(frac), log_p0, False, None, extra)


@dataclass(frozen=True)
class ConditionalExcess:
    x_grid: np.ndarray
    values: np.ndarray
    std_errs: np.ndarray
    conditioning_hits: int
    thresholds: np.ndarray

    def to_dict(self):
        return {
            "x": self.x_grid.tolist(),
            "value": self.values.tolist(),
            "std_err": self.std_errs.tolist(),
            "conditioning_hits": self.conditioning_hits,
            "x2_threshold": self.thresholds.tolist(),
        }


def conditional_excess(spec, u, x_grid, n, seed=0, rho=None, tilt=True, delta=0.2, min_hits=500):
    """Estimate P(X2 > rho u + x sqrt(u / w(u)) | X1 > u) over ``x_grid`` (bivariate models)."""
    if spec.k != 2:
        raise ArgumentError("conditional_excess needs a bivariate model")
    rho = float(spec.mixing.Sigma[0, 1]) if rho is None else float(rho)
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    w = float(spec.radial.hazard(u))
    scale = math.sqrt(u / w)
    t2 = rho * u + x * scale
    T = np.empty((x.size + 1, 2))
    T[0] = (u, -np.inf)
    T[1:, 0] = u
    T[1:, 1] = t2
    r0 = (1.0 - delta) * u / math.sqrt(spec.mixing.Sigma[0, 0]) if tilt else 0.0
    hits, _ = _hits_over_chunks(spec, T, int(n), seed, r0)
    base = int(hits[0])
    if base < min_hits:
        raise InsufficientSamplesError(f"only {base} conditioning hits (< {min_hits}); raise n or enable tilting")
    vals = hits[1:] / base
    se = np.sqrt(vals * (1.0 - vals) / base)
    return ConditionalExcess(x, vals, se, base, t2)

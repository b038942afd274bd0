"""Exact tail asymptotics P(X > t_n) ~ const * lambda_n**e * Fbar(u_n |b_I|).

Two routes to the constant are provided: the general theorem (with the
integrals tau_{J,L} / tau_L) and the corollary form (with an orthant
probability of a transformed Kotz vector). For |J| = 1 they must agree,
which is how the integrals are checked.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, linalg, special

from .errors import (
    AccuracyError,
    AmbiguityError,
    ArgumentError,
    DivergedError,
    GsdError,
    UnsupportedCaseError,
)
from .qp import QpProblem, solve
from .sampler import make_rng
from .special import signed_gamma_sf

ZERO_TOL = 1e-9
HALF_TOL = 1e-12
CONDITION_TOL = 1e-10
BACKEND_RTOL = 0.01
_TRUNCATE_SD = 12.0
_TRUNCATE_EXP = 80.0
# outer adaptive levels; the innermost line rule is far more accurate
_OUTER_RTOL = {1: 1e-10, 2: 1e-9, 3: 1e-6}


@dataclass(frozen=True, eq=False)
class IndexSplit:
    I: tuple
    J: tuple
    L: tuple
    M: tuple
    alpha_tilde: np.ndarray
    Cb_star: np.ndarray


def index_split(spec, sol, zero_tol=ZERO_TOL):
    """L = {i: alpha_i != 1/2 and (C b*)_i = 0}, M its complement, and alpha-tilde."""
    cb = spec.mixing.C @ sol.b_star
    scale = float(np.abs(cb).max())
    alpha = spec.alpha.alpha
    L, M = [], []
    for i in range(spec.k):
        if abs(alpha[i] - 0.5) <= HALF_TOL:
            M.append(i)
            continue
        r = abs(cb[i]) / scale
        if r <= zero_tol:
            L.append(i)
        elif r <= 10.0 * zero_tol:
            raise AmbiguityError(
                f"(C b*)_{i} = {cb[i]:.3e} is neither clearly zero nor clearly nonzero; "
                "confirm the configuration in exact arithmetic",
                candidate=i,
                residuals={"relative_value": r},
            )
        else:
            M.append(i)
    alpha_tilde = np.full(spec.k, 0.5)
    alpha_tilde[L] = alpha[L]
    alpha_tilde.setflags(write=False)
    return IndexSplit(sol.index_I, sol.index_J, tuple(L), tuple(M), alpha_tilde, cb)


# ---------------------------------------------------------------------------
# thresholds


@dataclass(frozen=True, eq=False)
class ThresholdSpec:
    """Limits q_I (finite) and q_J (finite or -inf) of the normalised thresholds."""

    q_I: np.ndarray
    q_J: np.ndarray
    mode: str = "custom"

    def to_dict(self):
        return {
            "mode": self.mode,
            "q_I": self.q_I.tolist(),
            "q_J": [None if np.isneginf(v) else float(v) for v in self.q_J],
        }


def threshold_normalize(spec, sol, b=None, mode="plain", q_I=None, q_J=None, tie_tol=1e-10):
    """Threshold limits for the plain ray u*b, or user-supplied ones (``mode="custom"``)."""
    I, J = list(sol.index_I), list(sol.index_J)
    if mode == "plain":
        b = np.asarray(sol.b_star if b is None else b, dtype=float)
        bs = np.asarray(sol.b_star)
        scale = max(1.0, float(np.abs(b).max()))
        gap = bs[J] - b[J]
        qj = np.where(gap > tie_tol * scale, -np.inf, 0.0)
        return ThresholdSpec(_ro(np.zeros(len(I))), _ro(qj), "plain")
    if mode != "custom":
        raise ArgumentError(f"unknown threshold mode {mode!r}")
    qi = np.zeros(len(I)) if q_I is None else np.atleast_1d(np.asarray(q_I, dtype=float))
    qj = np.full(len(J), -np.inf) if q_J is None else np.atleast_1d(np.asarray(q_J, dtype=float))
    if qi.shape != (len(I),) or qj.shape != (len(J),):
        raise ArgumentError(f"q_I needs {len(I)} entries and q_J needs {len(J)}")
    if not np.all(np.isfinite(qi)):
        raise ArgumentError("q_I must be finite")
    if np.any(np.isnan(qj)) or np.any(np.isposinf(qj)):
        raise ArgumentError("q_J entries must be finite or -inf")
    return ThresholdSpec(_ro(qi), _ro(qj), "custom")


def _ro(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# integrals


_LINE_NODES = 48


@lru_cache(maxsize=256)
def _jacobi_01(e):
    """Nodes t in (0, 1) and weights for int_0^1 t^e g(t) dt."""
    x, w = special.roots_jacobi(_LINE_NODES, 0.0, e)
    return 0.5 * (x + 1.0), w * 0.5 ** (e + 1.0)


def _line_rule(lo, hi, sing):
    """Nodes and weights on [lo, hi] for integrands with |x - p|^e factors.

    Pieces between break points are halved; each half uses a Gauss-Jacobi
    rule whose weight carries the power factor of its singular end. Weights
    are returned for the full integrand.
    """
    span = hi - lo
    pts = sorted(p for p, _ in sing if lo < p < hi)
    edges = [lo] + pts + [hi]

    def exponent_at(x):
        for p, e in sing:
            if abs(p - x) <= 1e-12 * max(1.0, abs(span)):
                return e
        return 0.0

    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        for start, end in ((a, mid), (b, mid)):
            e = round(exponent_at(start), 12)
            t, w = _jacobi_01(e)
            h = end - start
            xs.append(start + h * t)
            ws.append(abs(h) * w / t**e)
    return np.concatenate(xs), np.concatenate(ws)


def _nested_quad(log_density, lower, upper, sing_rows, sing_exps, epsrel, epsabs):
    """Integral of exp(log_density) over a box.

    ``log_density`` takes an (n, m) array. ``sing_rows`` r carry factors
    |r.y|^e; the innermost coordinate is integrated by :func:`_line_rule`, the
    outer ones adaptively with break points where a factor depends on that
    coordinate alone among the remaining ones.
    """
    m = len(lower)
    rows = np.atleast_2d(np.asarray(sing_rows, dtype=float)) if len(sing_rows) else np.zeros((0, m))
    exps = np.asarray(sing_exps, dtype=float)

    def breaks(level, outer):
        out = []
        for r, e in zip(rows, exps):
            if r[level] != 0.0 and not np.any(r[:level] != 0.0):
                out.append((-float(np.dot(r[level + 1:], outer)) / r[level], e))
        return out

    def inner(outer):
        x, w = _line_rule(lower[0], upper[0], breaks(0, outer))
        Y = np.empty((x.size, m))
        Y[:, 0] = x
        if m > 1:
            Y[:, 1:] = outer
        with np.errstate(divide="ignore", over="ignore"):
            return float(np.dot(w, np.exp(log_density(Y))))

    def level_fn(level, outer):
        if level == 0:
            return inner(outer)
        pts = [p for p, _ in breaks(level, outer) if lower[level] < p < upper[level]]
        val, _ = integrate.quad(
            lambda v: level_fn(level - 1, (v,) + tuple(outer)),
            lower[level],
            upper[level],
            points=sorted(pts) or None,
            epsrel=epsrel,
            epsabs=epsabs,
            limit=200,
        )
        return val

    return level_fn(m - 1, ()), None


def _log_abs_prod(Y, rows, exps):
    """sum_l exps_l log|rows_l . y| for each row y of Y."""
    if not len(exps):
        return np.zeros(Y.shape[0])
    with np.errstate(divide="ignore"):
        return np.log(np.abs(Y @ rows.T)) @ exps


def _jl_pieces(spec, J, L):
    J, L = list(J), list(L)
    if not J:
        raise ArgumentError("J must be non-empty")
    if not set(L) <= set(J):
        raise UnsupportedCaseError("L must be a subset of J")
    P = spec.mixing.Sigma_inv[np.ix_(J, J)]
    CJJ = spec.mixing.C[np.ix_(J, J)]
    local = [J.index(l) for l in L]
    rows = CJJ[local]
    exps = 2.0 * spec.alpha.alpha[L] - 1.0
    return P, rows, exps


def _gaussian_box(P, q):
    sd = np.sqrt(np.diag(np.linalg.inv(P)))
    upper = np.maximum(np.where(np.isfinite(q), q, 0.0), 0.0) + _TRUNCATE_SD * sd
    lower = np.where(np.isfinite(q), q, -_TRUNCATE_SD * sd)
    lower = np.maximum(lower, -_TRUNCATE_SD * sd)
    return lower, upper


def _gauss_weight_integral(P, rows, exps, q, method, n_mc, seed):
    """int_{y > q} prod_l |rows_l . y|^exps_l exp(-y^T P y / 2) dy; returns (value, error)."""
    m = P.shape[0]
    q = np.asarray(q, dtype=float)
    log_norm = 0.5 * m * math.log(2.0 * math.pi) - 0.5 * float(np.linalg.slogdet(P)[1])
    if method == "quadrature":
        lower, upper = _gaussian_box(P, q)
        if np.any(lower >= upper):
            return 0.0, 0.0

        def log_density(Y):
            return _log_abs_prod(Y, rows, exps) - 0.5 * np.einsum("ni,ij,nj->n", Y, P, Y)

        return _nested_quad(log_density, lower, upper, rows, exps, _OUTER_RTOL[m], 1e-15 * math.exp(log_norm))
    rng = make_rng(seed, 101)
    chol = linalg.cholesky(P, lower=True)
    # proposal N(0, kappa P^-1): the power weights push mass outwards, so widen it
    kappa = 1.0 + float(np.sum(np.maximum(exps, 0.0))) / m if len(exps) else 1.0
    total = total_sq = 0.0
    done = 0
    while done < n_mc:
        n = min(1_000_000, n_mc - done)
        z = rng.standard_normal((n, m))
        y = math.sqrt(kappa) * linalg.solve_triangular(chol, z.T, lower=True, trans="T").T
        log_w = 0.5 * m * math.log(kappa) - 0.5 * (1.0 - 1.0 / kappa) * np.einsum("ni,ij,nj->n", y, P, y)
        if len(exps):
            log_w = log_w + _log_abs_prod(y, rows, exps)
        w = np.where(np.all(y > q, axis=1), np.exp(log_w), 0.0)
        total += w.sum()
        total_sq += (w * w).sum()
        done += n
    mean = total / n_mc
    var = max(total_sq / n_mc - mean * mean, 0.0)
    scale = math.exp(log_norm)
    return scale * mean, scale * math.sqrt(var / n_mc)


def _resolve(method, m, quad_max):
    if method == "auto":
        return "quadrature" if m <= quad_max else "mc"
    if method not in ("quadrature", "mc", "both"):
        raise ArgumentError(f"unknown integration method {method!r}")
    return method


def _both(fn, *args):
    qv, _ = fn(*args, "quadrature")
    mv, me = fn(*args, "mc")
    if abs(qv - mv) > BACKEND_RTOL * abs(qv):
        raise AccuracyError(f"quadrature {qv:.6g} and Monte Carlo {mv:.6g} (se {me:.2g}) disagree by more than 1%")
    return qv


def tau_JL(spec, split, q_J, method="auto", n_mc=10**7, seed=0):
    """tau_{J,L} = int_{y_J > q_J} prod_L |(C_JJ y)_l|^(2 alpha_l - 1) exp(-y^T (Sigma^-1)_JJ y / 2) dy."""
    P, rows, exps = _jl_pieces(spec, split.J, split.L)
    q = np.atleast_1d(np.asarray(q_J, dtype=float))
    if q.shape != (len(split.J),):
        raise ArgumentError("q_J has the wrong length")
    method = _resolve(method, len(split.J), 3)

    def run(m):
        return _gauss_weight_integral(P, rows, exps, q, m, n_mc, seed)

    if method == "both":
        return _both(lambda m: run(m))
    return run(method)[0]


def tau_star_M(spec, sol, split):
    """prod over M of |b_I|^(1 - 2 alpha_i) |(C b*)_i|^(2 alpha_i - 1); 1 for empty M."""
    nb = sol.norm_bI
    log_t = 0.0
    for i in split.M:
        e = 2.0 * spec.alpha.alpha[i] - 1.0
        if e == 0.0:
            continue
        log_t += -e * math.log(nb) + e * math.log(abs(split.Cb_star[i]))
    return math.exp(log_t)


def _exp_weight_integral(C, exps_rows, exps, v, q, method, n_mc, seed):
    """int_{y > q} prod_l |rows_l . y|^exps_l exp(-v^T y) dy; returns (value, error)."""
    k = v.size
    log_closed = -float(v @ q) - float(np.sum(np.log(v)))
    if not len(exps):
        return math.exp(log_closed), 0.0
    if method == "quadrature":
        lower = q.copy()
        upper = q + _TRUNCATE_EXP / v

        def log_density(Y):
            return _log_abs_prod(Y, exps_rows, exps) - Y @ v

        return _nested_quad(log_density, lower, upper, exps_rows, exps, _OUTER_RTOL[k], 1e-15 * math.exp(log_closed))
    rng = make_rng(seed, 102)
    total = total_sq = 0.0
    done = 0
    while done < n_mc:
        n = min(1_000_000, n_mc - done)
        y = q + rng.exponential(size=(n, k)) / v
        with np.errstate(divide="ignore"):
            w = np.exp(np.log(np.abs(y @ exps_rows.T)) @ exps)
        total += w.sum()
        total_sq += (w * w).sum()
        done += n
    mean = total / n_mc
    var = max(total_sq / n_mc - mean * mean, 0.0)
    scale = math.exp(log_closed)
    return scale * mean, scale * math.sqrt(var / n_mc)


def tau_L_full(spec, split, q, u_vec, method="auto", n_mc=10**7, seed=0):
    """tau_L = int_{y > q} prod_L |(C y)_l|^(2 alpha_l - 1) exp(-u^T Sigma^-1 y) dy (J empty)."""
    if split.J:
        raise ArgumentError("tau_L is defined for empty J only")
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.shape != (spec.k,) or not np.all(np.isfinite(q)):
        raise ArgumentError("q must be a finite vector of length k")
    v = spec.mixing.Sigma_inv @ np.asarray(u_vec, dtype=float)
    if np.any(v <= 0):
        raise DivergedError("tau_L diverges: u^T Sigma^-1 e_i <= 0 for some i", residuals={"v": v.tolist()})
    L = list(split.L)
    rows = spec.mixing.C[L]
    exps = 2.0 * spec.alpha.alpha[L] - 1.0
    method = _resolve(method, spec.k, 3)

    def run(m):
        return _exp_weight_integral(spec.mixing.C, rows, exps, v, q, m, n_mc, seed)

    if method == "both":
        return _both(lambda m: run(m))
    return run(method)[0]


# ---------------------------------------------------------------------------
# orthant probability of the corollary


def _y_transform(spec, split):
    """Upper factor G with G^T G = (Sigma^-1)_JJ so that Y_J = G^-1 Y* ."""
    J = list(split.J)
    P = spec.mixing.Sigma_inv[np.ix_(J, J)]
    if split.L:
        G = spec.mixing.C[np.ix_(J, J)]
        scale = max(1.0, float(np.abs(P).max()))
        if np.abs(G.T @ G - P).max() > CONDITION_TOL * scale:
            raise ArgumentError(
                "corollary condition fails: C_JJ^T C_JJ differs from (Sigma^-1)_JJ while L is non-empty"
            )
        return G
    return linalg.cholesky(P, lower=False)


def _orthant_1d(G, at, q):
    return signed_gamma_sf(at[0], abs(G[0, 0]) * q[0])


def _orthant_2d(G, at, q):
    """Condition on Z_1 = (G Y)_1 and integrate the exact conditional probability of Z_2."""
    H = np.linalg.inv(G)

    def prob_given(z1):
        lo, hi = -np.inf, np.inf
        for i in range(2):
            c = q[i] - H[i, 0] * z1
            if H[i, 1] > 0:
                lo = max(lo, c / H[i, 1])
            elif H[i, 1] < 0:
                hi = min(hi, c / H[i, 1])
            elif not c < 0:
                return 0.0
        if lo >= hi:
            return 0.0
        return signed_gamma_sf(at[1], lo) - signed_gamma_sf(at[1], hi)

    a1 = at[0]
    top = special.gammainccinv(a1, 1e-17)
    log_c = -math.log(2.0) - special.gammaln(a1)

    # Z_1 = +-sqrt(2 s) with s ~ Gamma(a1, 1) and a fair sign
    def smooth(s):
        z = math.sqrt(2.0 * s)
        return math.exp(log_c - s) * (prob_given(z) + prob_given(-z))

    val, _ = integrate.quad(smooth, 0.0, top, weight="alg", wvar=(a1 - 1.0, 0.0), epsabs=1e-13, epsrel=1e-10, limit=400)
    return val


def _orthant_mc(G, at, q, n_mc, seed):
    rng = make_rng(seed, 103)
    m = len(at)
    hits = 0
    done = 0
    while done < n_mc:
        n = min(1_000_000, n_mc - done)
        z = np.sqrt(2.0 * rng.gamma(at, size=(n, m))) * rng.choice([-1.0, 1.0], size=(n, m))
        y = linalg.solve_triangular(G, z.T, lower=False).T if np.allclose(G, np.triu(G)) else np.linalg.solve(G, z.T).T
        hits += int(np.all(y > q, axis=1).sum())
        done += n
    p = hits / n_mc
    return p, math.sqrt(max(p * (1 - p), 0.0) / n_mc)


def orthant_probability(spec, split, q_J, method="auto", n_mc=10**6, seed=0):
    """P(Y_J > q_J) with Y_J = G^-1 Y*, Y* standard Kotz with parameter alpha-tilde_J.

    ``quadrature`` uses a closed form for |J| = 1, a conditional 1-D integral for
    |J| = 2, and the ratio of two tau_{J,L}-type integrals for |J| = 3.
    """
    J = list(split.J)
    if not J:
        return 1.0
    q = np.atleast_1d(np.asarray(q_J, dtype=float))
    if q.shape != (len(J),):
        raise ArgumentError("q_J has the wrong length")
    G = _y_transform(spec, split)
    at = np.asarray(split.alpha_tilde)[J]
    method = _resolve(method, len(J), 3)

    def run(m):
        if m == "mc":
            return _orthant_mc(G, at, q, n_mc, seed)
        if len(J) == 1:
            return _orthant_1d(G, at, q), 0.0
        if len(J) == 2:
            return _orthant_2d(G, at, q), 0.0
        if len(J) == 3:
            P = G.T @ G
            exps = 2.0 * at - 1.0
            num, _ = _gauss_weight_integral(P, G, exps, q, "quadrature", 0, 0)
            # over all of R^3 the integral factorises in z = G y
            log_den = float(np.sum(at * math.log(2.0) + special.gammaln(at))) - math.log(abs(np.linalg.det(G)))
            return num / math.exp(log_den), 0.0
        raise UnsupportedCaseError("orthant quadrature covers |J| <= 3")

    if method == "both":
        return _both(lambda m: run(m))
    return run(method)[0]


# ---------------------------------------------------------------------------
# the asymptotic formulas


@dataclass(frozen=True, eq=False)
class TailAsymptotics:
    branch: str
    constant: float
    exponent: float
    radius_scale: float
    law: object
    solution: object
    split: IndexSplit
    thresholds: ThresholdSpec
    b: np.ndarray
    details: dict = field(default_factory=dict)

    @property
    def ray_constant(self):
        """Constant multiplying (u w(u |b_I|))**exponent instead of lambda**exponent."""
        return self.constant * self.radius_scale**self.exponent

    def log_value(self, u):
        ut = float(u) * self.radius_scale
        lam = ut * float(self.law.hazard(ut))
        return math.log(self.constant) + self.exponent * math.log(lam) + float(self.law.log_survival(ut))

    def evaluate(self, u):
        return math.exp(self.log_value(u))

    def threshold_at(self, u):
        """A concrete threshold vector t(u) whose normalised limits are (q_I, q_J)."""
        ut = float(u) * self.radius_scale
        w = float(self.law.hazard(ut))
        t = float(u) * np.asarray(self.solution.b_star, dtype=float)
        I, J = list(self.split.I), list(self.split.J)
        t[I] += self.thresholds.q_I / w
        if J:
            qj = self.thresholds.q_J
            finite = np.isfinite(qj)
            tj = t[J]
            tj[finite] += qj[finite] * math.sqrt(ut / w)
            # -inf limits: the plain ray value u*b_j already sits far below u*b*_j
            tj[~finite] = float(u) * self.b[np.array(J)[~finite]]
            t[J] = tj
        return t

    def to_dict(self):
        return {
            "branch": self.branch,
            "I": list(self.split.I),
            "J": list(self.split.J),
            "L": list(self.split.L),
            "M": list(self.split.M),
            "constant": self.constant,
            "ray_constant": self.ray_constant,
            "exponent": self.exponent,
            "radius_scale": self.radius_scale,
            "thresholds": self.thresholds.to_dict(),
            "details": dict(self.details),
        }


def _prepare(spec, b, thresholds, sol):
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape != (spec.k,):
        raise ArgumentError(f"b must have {spec.k} entries")
    if sol is None:
        sol = solve(QpProblem(spec.mixing.Sigma, b))
    split = index_split(spec, sol)
    if thresholds is None:
        thresholds = threshold_normalize(spec, sol, b)
    a_u = np.asarray(sol.a) / sol.norm_bI
    if np.any(a_u <= 0):
        raise GsdError("internal invariant violated: (Sigma_II)^-1 u_I has non-positive entries")
    return b, sol, split, thresholds, a_u


def theorem31(spec, b, thresholds=None, sol=None, method="auto", n_mc=10**7, seed=0):
    """Tail asymptotics from the general theorem (part (a) if J is non-empty, part (b) otherwise)."""
    b, sol, split, th, a_u = _prepare(spec, b, thresholds, sol)
    av, mm = spec.alpha, spec.mixing
    log_base = special.gammaln(av.bar) - math.log(2.0) - av.log_gamma_prod() - 0.5 * mm.log_det_Sigma
    ts = tau_star_M(spec, sol, split)
    nL = len(split.L)
    abar_L = av.plain_sum(split.L)
    if split.J:
        if not set(split.L) <= set(split.J):
            raise UnsupportedCaseError("the theorem needs L to be a subset of J when J is non-empty")
        tau = tau_JL(spec, split, th.q_J, method=method, n_mc=n_mc, seed=seed)
        log_c = log_base + math.log(tau) + math.log(ts) - float(th.q_I @ a_u) - float(np.sum(np.log(a_u)))
        exponent = 1.0 - len(split.I) - len(split.J) / 2.0 + nL / 2.0 - abar_L
        details = {"tau_JL": tau, "tau_star_M": ts}
        branch = "thm-a"
    else:
        q = np.empty(spec.k)
        q[list(split.I)] = th.q_I
        u_vec = b / sol.norm_bI
        tau = tau_L_full(spec, split, q, u_vec, method=method, n_mc=n_mc, seed=seed)
        log_c = log_base + math.log(tau) + math.log(ts)
        exponent = 1.0 - spec.k + nL - 2.0 * abar_L
        details = {"tau_L": tau, "tau_star_M": ts}
        branch = "thm-b"
    return TailAsymptotics(branch, math.exp(log_c), exponent, sol.norm_bI, spec.radial, sol, split, th, _ro(b), details)


def corollary2(spec, b, thresholds=None, sol=None, method="auto", n_mc=10**6, seed=0):
    """Tail asymptotics in the corollary form, with an orthant probability instead of tau_{J,L}."""
    b, sol, split, th, a_u = _prepare(spec, b, thresholds, sol)
    if not split.J and split.L:
        raise UnsupportedCaseError("the corollary form needs J non-empty when L is non-empty")
    av = spec.alpha
    I, J = list(split.I), list(split.J)
    sigma_II = spec.mixing.Sigma[np.ix_(I, I)]
    log_det_II = float(np.linalg.slogdet(sigma_II)[1])
    at = np.asarray(split.alpha_tilde)
    abar_tilde_J = float(np.sum(at[J])) if J else 0.0
    prob = orthant_probability(spec, split, th.q_J, method=method, n_mc=n_mc, seed=seed)
    if prob <= 0:
        raise ArgumentError("the orthant probability vanishes for these thresholds")
    ts = tau_star_M(spec, sol, split)
    j_minus_l = [j for j in J if j not in split.L]
    log_c = (
        math.log(ts)
        + (abar_tilde_J - 1.0) * math.log(2.0)
        + special.gammaln(av.bar)
        - float(th.q_I @ a_u)
        + math.log(prob)
        - av.log_gamma_prod(I)
        - 0.5 * log_det_II
        - float(np.sum(np.log(a_u)))
        + sum(special.gammaln(0.5) - special.gammaln(av.alpha[j]) for j in j_minus_l)
    )
    nL = len(split.L)
    exponent = 1.0 - len(I) - len(J) / 2.0 + nL / 2.0 - av.plain_sum(split.L)
    details = {"orthant_probability": prob, "tau_star_M": ts}
    return TailAsymptotics("cor-2", math.exp(log_c), exponent, sol.norm_bI, spec.radial, sol, split, th, _ro(b), details)

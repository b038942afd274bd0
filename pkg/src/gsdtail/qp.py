"""The quadratic program min x^T Sigma^{-1} x subject to x >= b.

The solution is b* with b*_I = b_I on a minimal index set I and
b*_J = Sigma_JI (Sigma_II)^{-1} b_I on the complement, where
(Sigma_II)^{-1} b_I > 0 and b*_J >= b_J. ``solve`` certifies both conditions
before returning.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import linalg, optimize

from .errors import ArgumentError, DegeneracyError, MatrixError, OracleFailure
from .model import cholesky_lower

STRICT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QpProblem:
    Sigma: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.Sigma, dtype=float)
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ArgumentError("Sigma must be square")
        if b.shape != (sigma.shape[0],):
            raise ArgumentError(f"b must have {sigma.shape[0]} entries")
        if not np.all(np.isfinite(b)):
            raise ArgumentError("b must be finite")
        if not np.any(b > 0):
            raise ArgumentError("b needs at least one positive component")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12):
            raise MatrixError("Sigma is not symmetric")
        chol = cholesky_lower(0.5 * (sigma + sigma.T))
        for name, val in (("Sigma", sigma), ("b", b), ("chol", chol)):
            val = np.array(val, copy=True)
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def k(self):
        return self.b.size

    @property
    def precision(self):
        return linalg.cho_solve((self.chol, True), np.eye(self.k))


@dataclass(frozen=True, eq=False)
class QpSolution:
    b_star: np.ndarray
    index_I: tuple
    index_J: tuple
    a: np.ndarray  # (Sigma_II)^{-1} b_I
    min_value: float
    residuals: dict = field(default_factory=dict)

    @property
    def norm_bI(self):
        return float(np.sqrt(self.min_value))

    def to_dict(self):
        return {
            "b_star": self.b_star.tolist(),
            "I": list(self.index_I),
            "J": list(self.index_J),
            "min_value": self.min_value,
            "norm_bI": self.norm_bI,
            "residuals": dict(self.residuals),
        }


@dataclass
class _Candidate:
    index_I: tuple
    a: np.ndarray
    b_star: np.ndarray
    positivity: float  # min a / max|a|
    feasibility: float  # min (b*_J - b_J) / max|b|

    def certified(self, tol):
        return self.positivity > tol and self.feasibility >= -tol


def _candidate(sigma, b, index_I):
    I = list(index_I)
    J = [j for j in range(b.size) if j not in index_I]
    a = linalg.cho_solve(linalg.cho_factor(sigma[np.ix_(I, I)], lower=True), b[I])
    b_star = b.copy()
    if J:
        b_star[J] = sigma[np.ix_(J, I)] @ a
    b_star[I] = b[I]
    pos = float(a.min() / np.abs(a).max())
    feas = float((b_star[J] - b[J]).min() / np.abs(b).max()) if J else np.inf
    return _Candidate(tuple(I), a, b_star, pos, feas)


def _finish(problem, cand):
    I = cand.index_I
    J = tuple(j for j in range(problem.k) if j not in I)
    min_value = float(problem.b[list(I)] @ cand.a)
    residuals = {
        "positivity_margin": cand.positivity,
        "feasibility_margin": None if not J else cand.feasibility,
    }
    b_star = cand.b_star
    b_star.setflags(write=False)
    return QpSolution(b_star, I, J, cand.a, min_value, residuals)


def _nnls_index_set(problem):
    # dual: min_{a >= 0} |L^T a - L^{-1} b|^2, with the optimum x = Sigma a
    L = problem.chol
    rhs = linalg.solve_triangular(L, problem.b, lower=True)
    a, _ = optimize.nnls(L.T, rhs)
    if not np.any(a > 0):
        return None
    return tuple(np.flatnonzero(a > STRICT_TOL * a.max()).tolist())


def enumerate_index_sets(problem, tol=STRICT_TOL, first_only=True):
    """Certified index sets in order of size (then lexicographic).

    With ``first_only`` the scan stops at the first hit; otherwise it returns
    every certified set, which the uniqueness result says is exactly one.
    """
    sigma, b = problem.Sigma, problem.b
    found, best = [], None
    for size in range(1, problem.k + 1):
        for I in combinations(range(problem.k), size):
            if np.any(b[list(I)] <= 0) and size == 1:
                continue
            cand = _candidate(sigma, b, I)
            if cand.certified(tol):
                found.append(cand)
                if first_only:
                    return found, best
            score = min(cand.positivity, cand.feasibility)
            if best is None or score > min(best.positivity, best.feasibility):
                best = cand
    return found, best


def solve(problem, method="auto", tol=STRICT_TOL):
    """Solve the QP and return a certified :class:`QpSolution`.

    ``method`` is ``"auto"`` (dual NNLS, certified, falling back to
    enumeration), ``"enumerate"`` or ``"nnls"`` (no fallback).
    """
    if method not in ("auto", "enumerate", "nnls"):
        raise ArgumentError(f"unknown method {method!r}")
    if method != "enumerate":
        full = tuple(range(problem.k))
        cand = _candidate(problem.Sigma, problem.b, full)
        if cand.certified(tol):
            return _finish(problem, cand)
        I = _nnls_index_set(problem)
        if I is not None:
            cand = _candidate(problem.Sigma, problem.b, I)
            if cand.certified(tol):
                return _finish(problem, cand)
        if method == "nnls":
            raise DegeneracyError(
                "active set from NNLS does not certify",
                candidate=None if I is None else list(I),
                residuals=None if I is None else {"positivity": cand.positivity, "feasibility": cand.feasibility},
            )
    found, best = enumerate_index_sets(problem, tol)
    if not found:
        raise DegeneracyError(
            "no index set satisfies the optimality characterization within tolerance",
            candidate=None if best is None else list(best.index_I),
            residuals=None if best is None else {"positivity": best.positivity, "feasibility": best.feasibility},
        )
    return _finish(problem, found[0])


def solve_qp(Sigma, b, **kwargs):
    return solve(QpProblem(Sigma, b), **kwargs)


# ---------------------------------------------------------------------------
# verification


@dataclass
class CheckResult:
    passed: bool
    residual: float


@dataclass
class VerificationReport:
    checks: dict

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def to_dict(self):
        return {name: {"passed": c.passed, "residual": c.residual} for name, c in self.checks.items()}


def verify_solution(problem, sol, tol=1e-9, rng=None, n_random=10):
    """Re-derive every optimality identity from (Sigma, b, I) and compare with ``sol``."""
    rng = np.random.default_rng(0) if rng is None else rng
    sigma, b = problem.Sigma, problem.b
    I, J = list(sol.index_I), list(sol.index_J)
    bs = np.asarray(sol.b_star, dtype=float)
    if bs.shape != b.shape:
        raise ArgumentError("solution and problem dimensions differ")
    a = linalg.cho_solve(linalg.cho_factor(sigma[np.ix_(I, I)], lower=True), b[I])
    scale = max(1.0, float(np.abs(b).max()))
    checks = {}

    feas = float((bs - b).min())
    checks["feasibility"] = CheckResult(feas >= -tol * scale, feas)

    pos = float(a.min() / np.abs(a).max())
    checks["positivity"] = CheckResult(pos > 0.0, pos)

    if J:
        formula = sigma[np.ix_(J, I)] @ a
        res3 = float(np.abs(bs[J] - formula).max()) / scale
        prec = problem.precision
        alt = -np.linalg.solve(prec[np.ix_(J, J)], prec[np.ix_(J, I)] @ b[I])
        res3b = float(np.abs(alt - formula).max()) / scale
    else:
        res3 = res3b = 0.0
    checks["J_block"] = CheckResult(res3 <= tol, res3)
    checks["J_block_precision_form"] = CheckResult(res3b <= tol, res3b)

    prec_bs = linalg.cho_solve((problem.chol, True), bs)
    worst = 0.0
    for _ in range(n_random):
        x = rng.standard_normal(problem.k)
        lhs, rhs = float(x @ prec_bs), float(x[I] @ a)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs), float(np.abs(x).max() * np.abs(a).max())))
    checks["linear_identity"] = CheckResult(worst <= tol, worst)

    mv = float(b[I] @ a)
    quad = float(bs @ prec_bs)
    res5 = max(abs(sol.min_value - mv), abs(quad - mv)) / mv
    checks["min_value"] = CheckResult(res5 <= tol, res5)
    return VerificationReport(checks)


def brute_force_min(problem, n_starts=50, max_iter=200000, tol=1e-14, seed=0):
    """Independent oracle: accelerated projected gradient from random feasible starts."""
    from . import kernels

    rng = np.random.default_rng(seed)
    b = problem.b
    base = np.maximum(b, 0.0)
    spread = max(1.0, float(np.abs(b).max()))
    X0 = base + rng.exponential(spread, size=(n_starts, problem.k))
    X, values, converged = kernels.pgd_box_qp(problem.precision, b, X0, max_iter, tol)
    if not np.any(converged):
        raise OracleFailure("projected gradient did not converge from any start")
    return float(values[converged].min())

"""Radial laws in the Gumbel max-domain of attraction.

All tail quantities are computed from log survival functions so that ratios
stay finite long after the survival function itself underflows. The scaling
function is the von Mises choice ``w = f / Fbar``.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy import optimize, special

from .errors import ArgumentError, OutOfDomainError
from .special import log_gammaincc

# log-survival depth of the top point of the default certificate grid
DEFAULT_TAIL_DEPTH = 5000.0


def _scalar_or_array(x):
    if np.ndim(x) == 0:
        return float(x)
    return x


def _as_nonneg(u):
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ArgumentError("radius must be non-negative")
    return arr


class RadialLaw(ABC):
    """Distribution of a positive radius R with F(0) = 0 and infinite upper endpoint."""

    kind = "abstract"

    @abstractmethod
    def _log_sf(self, u):
        """log Fbar(u) for u > 0 (array in, array out)."""

    @abstractmethod
    def _log_pdf(self, u):
        """log f(u) for u > 0."""

    @abstractmethod
    def isf(self, p):
        """Inverse survival function: the u with Fbar(u) = p."""

    @abstractmethod
    def sample(self, rng, n):
        """Draw n independent radii."""

    @abstractmethod
    def to_dict(self):
        """JSON-ready description, inverse of :func:`law_from_dict`."""

    def log_survival(self, u):
        arr = _as_nonneg(u)
        with np.errstate(divide="ignore"):
            out = np.where(arr > 0, self._log_sf(np.maximum(arr, 1e-300)), 0.0)
        return _scalar_or_array(out)

    def survival(self, u):
        return _scalar_or_array(np.exp(self.log_survival(u)))

    def log_density(self, u):
        arr = _as_nonneg(u)
        with np.errstate(divide="ignore"):
            out = np.where(arr > 0, self._log_pdf(np.maximum(arr, 1e-300)), -np.inf)
        return _scalar_or_array(out)

    def density(self, u):
        return _scalar_or_array(np.exp(self.log_density(u)))

    def hazard(self, u):
        """f/Fbar at any u > 0, without the tail-region check of :meth:`scaling_w`."""
        return _scalar_or_array(np.exp(np.asarray(self.log_density(u)) - np.asarray(self.log_survival(u))))

    def scaling_w(self, u):
        """Scaling function w(u) of the Gumbel limit; only defined in the tail region."""
        arr = _as_nonneg(u)
        if np.any(arr < self.u_min):
            raise OutOfDomainError(
                f"w is a tail object: u must be >= u_min = {self.u_min:.6g} for {self.kind}"
            )
        return self.hazard(arr)

    @cached_property
    def u_min(self):
        # smallest u with Fbar(u) < 0.1
        return float(self.isf(0.1))

    def log_isf(self, log_p):
        """Radius with log Fbar = log_p; works where p itself underflows."""
        if log_p >= 0:
            raise ArgumentError("log_p must be negative")
        if log_p > -600:
            return float(self.isf(math.exp(log_p)))
        lo = float(self.isf(1e-200))
        hi = 2.0 * lo
        while self.log_survival(hi) > log_p:
            hi *= 2.0
        return optimize.brentq(lambda x: self.log_survival(x) - log_p, lo, hi, xtol=1e-14, rtol=1e-14)

    def sample_tail(self, rng, n, r0):
        """Draw n radii from the law conditioned on R > r0.

        Returns ``(radii, log_weight)`` where ``log_weight = log Fbar(r0)`` is
        the probability of the conditioning event.
        """
        log_p0 = float(self.log_survival(r0))
        p0 = math.exp(log_p0)
        if p0 < 1e-300:
            raise ArgumentError(f"conditioning radius {r0} is too deep in the tail to invert")
        v = rng.random(n)
        radii = np.maximum(self.isf(p0 * (1.0 - v)), r0)
        return radii, log_p0


class _GammaPowerLaw(RadialLaw):
    # R = (T / rate) ** (1 / power) with T ~ Gamma(shape, 1)

    @property
    @abstractmethod
    def _params(self):
        """(shape, rate, power)"""

    def _log_sf(self, u):
        shape, rate, power = self._params
        return log_gammaincc(shape, rate * u**power)

    def _log_pdf(self, u):
        shape, rate, power = self._params
        return (
            math.log(power)
            + shape * math.log(rate)
            + (power * shape - 1.0) * np.log(u)
            - rate * u**power
            - math.lgamma(shape)
        )

    def isf(self, p):
        shape, rate, power = self._params
        t = special.gammainccinv(shape, np.asarray(p, dtype=float))
        return _scalar_or_array((t / rate) ** (1.0 / power))

    def sample(self, rng, n):
        shape, rate, power = self._params
        return (rng.standard_gamma(shape, n) / rate) ** (1.0 / power)


@dataclass(frozen=True)
class ChiRadial(_GammaPowerLaw):
    """R**2 chi-squared with ``dof`` degrees of freedom (the Gaussian radius for dof = k)."""

    dof: float
    kind = "chi"

    def __post_init__(self):
        if not self.dof > 0:
            raise ArgumentError("chi degrees of freedom must be positive")

    @property
    def _params(self):
        return 0.5 * self.dof, 0.5, 2.0

    def to_dict(self):
        return {"kind": self.kind, "dof": self.dof}


@dataclass(frozen=True)
class KotzRadial(_GammaPowerLaw):
    """Radius of a Kotz Type I GSD vector, density generator c x**N exp(-r x**s).

    ``alpha_bar`` is the sum of the Dirichlet parameters of the host model.
    """

    N: float
    r: float
    s: float
    alpha_bar: float
    kind = "kotz"

    def __post_init__(self):
        if not self.alpha_bar > 0:
            raise ArgumentError("alpha_bar must be positive")
        if not self.N > -self.alpha_bar:
            raise ArgumentError("Kotz N must exceed -alpha_bar")
        if not (self.r > 0 and self.s > 0):
            raise ArgumentError("Kotz r and s must be positive")

    @property
    def _params(self):
        return (self.N + self.alpha_bar) / self.s, self.r, 2.0 * self.s

    @classmethod
    def standardized(cls, alpha_bar):
        return cls(0.0, 0.5, 1.0, alpha_bar)

    def to_dict(self):
        return {"kind": self.kind, "N": self.N, "r": self.r, "s": self.s, "alpha_bar": self.alpha_bar}


@dataclass(frozen=True)
class WeibullTail(RadialLaw):
    """Fbar(u) = exp(-c u**tau)."""

    c: float
    tau: float
    kind = "weibull_tail"

    def __post_init__(self):
        if not (self.c > 0 and self.tau > 0):
            raise ArgumentError("WeibullTail needs c > 0 and tau > 0")

    def _log_sf(self, u):
        return -self.c * u**self.tau

    def _log_pdf(self, u):
        return math.log(self.c * self.tau) + (self.tau - 1.0) * np.log(u) - self.c * u**self.tau

    def hazard(self, u):
        arr = _as_nonneg(u)
        return _scalar_or_array(self.c * self.tau * arr ** (self.tau - 1.0))

    def isf(self, p):
        p = np.asarray(p, dtype=float)
        return _scalar_or_array((-np.log(p) / self.c) ** (1.0 / self.tau))

    def log_isf(self, log_p):
        if log_p >= 0:
            raise ArgumentError("log_p must be negative")
        return float((-log_p / self.c) ** (1.0 / self.tau))

    def sample(self, rng, n):
        return (rng.standard_exponential(n) / self.c) ** (1.0 / self.tau)

    def sample_tail(self, rng, n, r0):
        # memoryless in the transformed scale c * R**tau
        e = rng.standard_exponential(n)
        radii = (r0**self.tau + e / self.c) ** (1.0 / self.tau)
        return radii, float(self.log_survival(r0))

    def to_dict(self):
        return {"kind": self.kind, "c": self.c, "tau": self.tau}


def law_from_dict(spec, alpha_bar=None):
    """Build a radial law from its JSON description.

    A ``kotz`` entry may omit ``alpha_bar``; the host model then supplies it.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ArgumentError("radial law spec needs a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "chi":
            return ChiRadial(float(spec["dof"]))
        if kind == "kotz":
            ab = spec.get("alpha_bar", alpha_bar)
            if ab is None:
                raise ArgumentError("kotz law needs alpha_bar")
            return KotzRadial(float(spec.get("N", 0.0)), float(spec.get("r", 0.5)), float(spec.get("s", 1.0)), float(ab))
        if kind == "weibull_tail":
            return WeibullTail(float(spec["c"]), float(spec["tau"]))
    except KeyError as exc:
        raise ArgumentError(f"radial law '{kind}' is missing parameter {exc}") from None
    raise ArgumentError(f"unknown radial law kind {kind!r}")


def survival_by_quadrature(law, u):
    """Fbar(u) as the integral of the density over (u, inf); a check on closed forms."""
    from scipy import integrate

    upper = law.isf(1e-300)
    if u >= upper:
        return 0.0
    val, _ = integrate.quad(law.density, u, upper, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


# ---------------------------------------------------------------------------
# max-domain-of-attraction diagnostics


@dataclass
class MdaCertificate:
    law: dict
    u_grid: list
    x_grid: list
    gumbel_deviation: float
    gumbel_pass: bool
    resn_values: list
    resn_top: float
    resn_decreasing: bool
    resn_pass: bool
    envelope_c: float
    envelope_eps: float
    envelope_pass: bool
    params: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.gumbel_pass and self.resn_pass and self.envelope_pass

    def to_dict(self):
        out = {
            "law": self.law,
            "params": self.params,
            "passed": self.passed,
            "gumbel": {"max_deviation": self.gumbel_deviation, "pass": self.gumbel_pass},
            "resn": {
                "values": self.resn_values,
                "top": self.resn_top,
                "decreasing": self.resn_decreasing,
                "pass": self.resn_pass,
            },
            "envelope": {"c": self.envelope_c, "eps": self.envelope_eps, "pass": self.envelope_pass},
            "u_grid": self.u_grid,
            "x_grid": self.x_grid,
        }
        return out


def default_u_grid(law, n=25, depth=DEFAULT_TAIL_DEPTH):
    lo = law.u_min
    hi = law.log_isf(-depth)
    return np.geomspace(lo, hi, n)


def gumbel_deviation(law, u, x_grid):
    """max_x |Fbar(u + x/w(u)) / Fbar(u) - exp(-x)|."""
    x = np.asarray(x_grid, dtype=float)
    w = law.hazard(u)
    arg = u + x / w
    if np.any(arg < 0):
        raise ArgumentError("x grid reaches below zero radius at this u")
    log_ratio = np.asarray(law.log_survival(arg)) - law.log_survival(u)
    return float(np.max(np.abs(np.exp(log_ratio) - np.exp(-x))))


def resn_log_sequence(law, u_grid, r=1.1, eta=2.0):
    """log of (u w(u))**eta * Fbar(r u) / Fbar(u) along the grid."""
    u = np.asarray(u_grid, dtype=float)
    lam = u * np.asarray(law.hazard(u))
    return eta * np.log(lam) + np.asarray(law.log_survival(r * u)) - np.asarray(law.log_survival(u))


def fit_envelope(law, u_values, s_max=50.0, n_s=501, eps_candidates=(0.5, 0.25, 0.1, 0.05, 0.02, 0.01)):
    """Smallest c with Fbar(u + s/w)/Fbar(u) <= c (1 + eps s)**(-1/eps) over the grids.

    Returns ``(c, eps)`` for the candidate eps giving the smallest c.
    """
    s = np.linspace(0.0, s_max, n_s)
    best = (math.inf, float("nan"))
    for eps in eps_candidates:
        worst = -math.inf
        for u in np.atleast_1d(u_values):
            w = law.hazard(u)
            log_ratio = np.asarray(law.log_survival(u + s / w)) - law.log_survival(u)
            worst = max(worst, float(np.max(log_ratio + np.log1p(eps * s) / eps)))
        c = math.exp(worst)
        if c < best[0]:
            best = (c, eps)
    return best


def mda_certificate(law, x_grid=None, u_grid=None, r=1.1, eta=2.0, eps=1e-6, gumbel_tol=0.02, s_max=50.0):
    """Finite-u diagnostics of the Gumbel max-domain-of-attraction property.

    Three checks: the Gumbel limit at the top of the u grid, the decay of
    ``(u w)**eta Fbar(r u)/Fbar(u)`` and an envelope
    ``Fbar(u + s/w)/Fbar(u) <= c (1 + eps s)**(-1/eps)`` on ``s in [0, s_max]``.
    """
    x = np.linspace(-2.0, 2.0, 81) if x_grid is None else np.asarray(x_grid, dtype=float)
    u = default_u_grid(law) if u_grid is None else np.asarray(u_grid, dtype=float)
    u_top = float(u[-1])

    dev = gumbel_deviation(law, u_top, x)

    log_seq = resn_log_sequence(law, u, r=r, eta=eta)
    upper = log_seq[len(log_seq) // 2 :]
    decreasing = bool(np.all(np.diff(upper) < 0))
    top = float(np.exp(log_seq[-1]))

    c, eps_fit = fit_envelope(law, u[len(u) // 2 :], s_max=s_max)

    return MdaCertificate(
        law=law.to_dict(),
        u_grid=u.tolist(),
        x_grid=x.tolist(),
        gumbel_deviation=dev,
        gumbel_pass=dev < gumbel_tol,
        resn_values=np.exp(log_seq).tolist(),
        resn_top=top,
        resn_decreasing=decreasing,
        resn_pass=decreasing and top < eps,
        envelope_c=c,
        envelope_eps=eps_fit,
        envelope_pass=math.isfinite(c),
        params={"r": r, "eta": eta, "eps": eps, "gumbel_tol": gumbel_tol, "s_max": s_max},
    )


@dataclass
class TailRatio:
    u: np.ndarray
    log_ratio: np.ndarray

    @property
    def ratio(self):
        return np.exp(self.log_ratio)


def tail_equivalence_ratio(law1, law2, u_grid):
    """Fbar1(u)/Fbar2(u) along the grid, formed in log space."""
    u = np.asarray(u_grid, dtype=float)
    return TailRatio(u, np.asarray(law1.log_survival(u)) - np.asarray(law2.log_survival(u)))

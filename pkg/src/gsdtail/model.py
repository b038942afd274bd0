"""Generalised symmetrised Dirichlet (GSD) models and their densities.

A GSD vector is ``X = R * A.T @ U`` with ``U ~ SD(k, alpha)`` on the unit
sphere and an independent radius ``R ~ F``. Everything here is immutable and
evaluated through log-Gamma so the constants survive large ``alpha``.
"""

from dataclasses import dataclass
import json
import math

import numpy as np
from scipy import integrate, linalg, special

from .errors import ArgumentError, MatrixError, ModelValidationError, UnsupportedCaseError
from .radial import KotzRadial, RadialLaw, law_from_dict

MAX_CONDITION = 1e12


class _Singular:
    """Marker returned where a density is +inf (support boundary or zero coordinate)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __float__(self):
        return math.inf

    def __repr__(self):
        return "SINGULAR"


SINGULAR = _Singular()


def _frozen(arr):
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AlphaVector:
    """Dirichlet parameters alpha_1..alpha_k, all positive."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if a.ndim != 1:
            raise ModelValidationError("alpha_dimension", "alpha must be a vector")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ModelValidationError("alpha_positive", f"every alpha_i must be > 0, got {a.tolist()}")
        object.__setattr__(self, "alpha", _frozen(a))

    @property
    def k(self):
        return self.alpha.size

    @property
    def bar(self):
        return float(math.fsum(self.alpha))

    def partial_sum(self, index_set):
        """Sum of alpha over ``index_set``; the empty set gives 1 by convention.

        The convention only fits product-form constants. Exponent arithmetic
        uses :meth:`plain_sum`, where the empty sum is 0.
        """
        idx = list(index_set)
        if not idx:
            return 1.0
        return float(math.fsum(self.alpha[idx]))

    def plain_sum(self, index_set):
        idx = list(index_set)
        return float(math.fsum(self.alpha[idx])) if idx else 0.0

    def log_gamma_prod(self, index_set=None):
        a = self.alpha if index_set is None else self.alpha[list(index_set)]
        return float(np.sum(special.gammaln(a)))

    def tolist(self):
        return self.alpha.tolist()


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Non-singular A with Sigma = A.T @ A and C = inv(A.T).

    Sigma must be a correlation matrix unless ``normalized=False``.
    """

    A: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ModelValidationError("A_square", f"A must be square, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ModelValidationError("A_finite", "A has non-finite entries")
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] <= 1e-12 * max(sv[0], 1.0):
            raise ModelValidationError("A_nonsingular", "A is singular")
        sigma = A.T @ A
        sigma = 0.5 * (sigma + sigma.T)
        if (sv[0] / sv[-1]) ** 2 > MAX_CONDITION:
            raise ModelValidationError("Sigma_conditioning", f"cond(Sigma) exceeds {MAX_CONDITION:g}")
        if self.normalized and not np.allclose(np.diag(sigma), 1.0, rtol=0, atol=1e-10):
            raise ModelValidationError(
                "unit_diagonal",
                "Sigma = A^T A must have unit diagonal (pass normalized=False to allow otherwise)",
            )
        chol = cholesky_lower(sigma)
        sigma_inv = linalg.cho_solve((chol, True), np.eye(A.shape[0]))
        sigma_inv = 0.5 * (sigma_inv + sigma_inv.T)
        C = np.linalg.solve(A.T, np.eye(A.shape[0]))
        scale = max(1.0, float(np.max(np.abs(sigma_inv))))
        if np.max(np.abs(C.T @ C - sigma_inv)) > 1e-10 * scale:
            raise ModelValidationError("C_inverse_consistency", "C^T C differs from inv(Sigma)")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "Sigma", _frozen(sigma))
        object.__setattr__(self, "Sigma_inv", _frozen(sigma_inv))
        object.__setattr__(self, "C", _frozen(C))
        object.__setattr__(self, "chol", _frozen(chol))
        object.__setattr__(self, "det_Sigma", float(np.linalg.det(A)) ** 2)

    @property
    def k(self):
        return self.A.shape[0]

    @property
    def log_det_Sigma(self):
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def is_identity(self, tol=1e-14):
        return bool(np.allclose(self.A, np.eye(self.k), rtol=0, atol=tol))


def cholesky_lower(sigma, max_condition=MAX_CONDITION):
    """Lower Cholesky factor with a condition-number guard."""
    sigma = np.asarray(sigma, dtype=float)
    try:
        chol = linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError:
        raise MatrixError("matrix is not positive definite") from None
    d = np.diag(chol)
    # cheap lower bound on the condition number from the Cholesky diagonal
    if (d.max() / d.min()) ** 2 > max_condition:
        raise MatrixError(f"matrix condition number exceeds {max_condition:g}")
    return chol


@dataclass(frozen=True)
class KotzParams:
    """Kotz Type I generator g(x) = c x**N exp(-r x**s)."""

    N: float = 0.0
    r: float = 0.5
    s: float = 1.0

    def validate(self, alpha_bar):
        if not self.N > -alpha_bar:
            raise ModelValidationError("kotz_N", f"N must exceed -alpha_bar = {-alpha_bar}")
        if not (self.r > 0 and self.s > 0):
            raise ModelValidationError("kotz_rs", "r and s must be positive")

    @property
    def is_standardized(self):
        return self.N == 0.0 and self.r == 0.5 and self.s == 1.0


@dataclass(frozen=True, eq=False)
class ModelSpec:
    alpha: AlphaVector
    mixing: MixingMatrix
    radial: RadialLaw

    def __post_init__(self):
        k = self.alpha.k
        if k < 2:
            raise ModelValidationError("k_at_least_2", "dimension k must be at least 2")
        if self.mixing.k != k:
            raise ModelValidationError("dimension_consistency", f"alpha has {k} entries but A is {self.mixing.k}x{self.mixing.k}")
        ab = getattr(self.radial, "alpha_bar", None)
        if ab is not None and not math.isclose(ab, self.alpha.bar, rel_tol=1e-12):
            raise ModelValidationError(
                "dimension_consistency", f"radial law alpha_bar {ab} differs from sum(alpha) {self.alpha.bar}"
            )

    @classmethod
    def build(cls, alpha, A=None, radial=None, normalized=True):
        """Convenience constructor; defaults to A = I and the standardized Kotz radius."""
        av = alpha if isinstance(alpha, AlphaVector) else AlphaVector(alpha)
        A = np.eye(av.k) if A is None else A
        mm = A if isinstance(A, MixingMatrix) else MixingMatrix(A, normalized=normalized)
        radial = KotzRadial.standardized(av.bar) if radial is None else radial
        return cls(av, mm, radial)

    @property
    def k(self):
        return self.alpha.k

    def to_dict(self):
        return {
            "alpha": self.alpha.tolist(),
            "A": self.mixing.A.tolist(),
            "radial": self.radial.to_dict(),
            "normalized": self.mixing.normalized,
        }

    @classmethod
    def from_dict(cls, doc):
        for key in ("alpha", "A", "radial"):
            if key not in doc:
                raise ModelValidationError(f"missing_{key}", f"model document needs '{key}'")
        alpha = AlphaVector(doc["alpha"])
        mixing = MixingMatrix(np.asarray(doc["A"], dtype=float), normalized=bool(doc.get("normalized", True)))
        radial = law_from_dict(doc["radial"], alpha_bar=alpha.bar)
        return cls(alpha, mixing, radial)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"model JSON is malformed: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


# ---------------------------------------------------------------------------
# densities


def _alpha_of(obj):
    if isinstance(obj, ModelSpec):
        return obj.alpha
    if isinstance(obj, AlphaVector):
        return obj
    return AlphaVector(obj)


def _log_abs_power_product(values, exponents):
    """sum_i exponents_i * log|values_i|; SINGULAR or -inf where a value is zero."""
    values = np.asarray(values, dtype=float)
    exponents = np.asarray(exponents, dtype=float)
    zero = values == 0.0
    active = exponents != 0.0
    if np.any(zero & active & (exponents < 0)):
        return SINGULAR
    if np.any(zero & active):
        return -math.inf
    mask = active & ~zero
    return float(np.sum(exponents[mask] * np.log(np.abs(values[mask]))))


def sd_density(alpha, u):
    """Density of the first k-1 coordinates of U ~ SD(k, alpha) at ``u``."""
    av = _alpha_of(alpha)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (av.k - 1,):
        raise ArgumentError(f"u must have k-1 = {av.k - 1} entries")
    s = float(np.dot(u, u))
    if s > 1.0:
        return 0.0
    a = av.alpha
    log_c = special.gammaln(av.bar) - av.log_gamma_prod()
    lp = _log_abs_power_product(u, 2.0 * a[:-1] - 1.0)
    if lp is SINGULAR:
        return SINGULAR
    rest = 1.0 - s
    ak = a[-1]
    if rest <= 0.0:
        if ak < 1.0:
            return SINGULAR
        if ak > 1.0:
            return 0.0
        return float(math.exp(log_c + lp))
    return float(math.exp(log_c + lp + (ak - 1.0) * math.log(rest)))


def _joint_product(av, x):
    return _log_abs_power_product(x, 2.0 * av.alpha - 1.0)


def gsd_joint_density(alpha, g, x):
    """h(x) = g(sum x_i^2) * prod |x_i|^(2 alpha_i - 1) for a density generator ``g``.

    ``alpha`` may be an AlphaVector, a ModelSpec with A = I, or a sequence.
    """
    if isinstance(alpha, ModelSpec) and not alpha.mixing.is_identity():
        raise UnsupportedCaseError("gsd_joint_density covers A = identity only")
    av = _alpha_of(alpha)
    x = np.asarray(x, dtype=float)
    if x.shape != (av.k,):
        raise ArgumentError(f"x must have k = {av.k} entries")
    gval = float(g(float(np.dot(x, x))))
    if gval < 0 or math.isnan(gval):
        raise ArgumentError("density generator returned a negative value")
    lp = _log_abs_power_product(x, 2.0 * av.alpha - 1.0)
    if lp is SINGULAR:
        return SINGULAR
    return gval * math.exp(lp)


def kotz_log_constant(alpha, kotz):
    """log c normalising g(x) = c x**N exp(-r x**s) for parameter vector ``alpha``."""
    av = _alpha_of(alpha)
    kotz.validate(av.bar)
    m = (kotz.N + av.bar) / kotz.s
    return (
        special.gammaln(av.bar)
        - av.log_gamma_prod()
        + math.log(kotz.s)
        + m * math.log(kotz.r)
        - special.gammaln(m)
    )


def kotz_generator(alpha, kotz):
    """The normalised Kotz Type I density generator as a callable."""
    log_c = kotz_log_constant(alpha, kotz)

    def g(x):
        x = np.asarray(x, dtype=float)
        if kotz.N == 0:
            out = np.exp(log_c - kotz.r * x**kotz.s)
        else:
            with np.errstate(divide="ignore"):
                out = np.exp(log_c + kotz.N * np.log(x) - kotz.r * x**kotz.s)
        return float(out) if out.ndim == 0 else out

    return g


def kotz_density(spec, kotz, x):
    """Density of A^T X for a Kotz Type I GSD vector X.

    The standardized generator (N = 0, 2r = s = 1) is supported for any A;
    other (N, r, s) only for A = identity.
    """
    av = spec.alpha
    kotz.validate(av.bar)
    x = np.asarray(x, dtype=float)
    if x.shape != (av.k,):
        raise ArgumentError(f"x must have k = {av.k} entries")
    if kotz.is_standardized:
        mm = spec.mixing
        cx = mm.C @ x
        lp = _joint_product(av, cx)
        if lp is SINGULAR:
            return SINGULAR
        q = float(x @ mm.Sigma_inv @ x)
        log_h = -av.bar * math.log(2.0) - av.log_gamma_prod() - 0.5 * mm.log_det_Sigma - 0.5 * q + lp
        return math.exp(log_h)
    if not spec.mixing.is_identity():
        raise UnsupportedCaseError("general Kotz (N, r, s) density is only available for A = identity")
    return gsd_joint_density(av, kotz_generator(av, kotz), x)


def radial_density_from_generator(g, alpha, r):
    """Radial density f(r) implied by the density generator ``g``."""
    av = _alpha_of(alpha)
    if not r > 0:
        raise ArgumentError("radius must be positive")
    log_ratio = av.log_gamma_prod() - special.gammaln(av.bar)
    return 2.0 * math.exp(log_ratio) * float(g(r * r)) * r ** (2.0 * av.bar - 1.0)


# -- subvectors --------------------------------------------------------------


def _check_index_set(spec, index_set):
    idx = sorted(set(int(i) for i in index_set))
    if not idx or len(idx) >= spec.k:
        raise ArgumentError("index set must be non-empty and proper")
    if idx[0] < 0 or idx[-1] >= spec.k:
        raise ArgumentError("index out of range")
    return idx


def _radial_kernel(law, beta, alpha_bar, z):
    """int_z^inf (r^2 - z^2)^(beta-1) r^(-2(alpha_bar-1)) f(r) dr."""
    if not hasattr(law, "density"):
        raise UnsupportedCaseError("subvector densities need an absolutely continuous radial law")
    power = -2.0 * (alpha_bar - 1.0)
    if z == 0.0:
        def integrand0(r):
            return r ** (2.0 * (beta - 1.0) + power) * law.density(r)
        top = law.isf(1e-300)
        val, _ = integrate.quad(integrand0, 0.0, top, epsabs=0.0, epsrel=1e-10, limit=400)
        return val
    log_sf_z = law.log_survival(z)
    top = law.log_isf(log_sf_z - 45.0)
    top = max(top, 2.0 * z)

    def smooth(r):
        return (r + z) ** (beta - 1.0) * r**power * law.density(r)

    # algebraic endpoint weight (r - z)^(beta - 1) handles the singularity at r = z
    val, _ = integrate.quad(
        smooth, z, top, weight="alg", wvar=(beta - 1.0, 0.0), epsabs=0.0, epsrel=1e-11, limit=400
    )
    return val


def subvector_radial_density(spec, index_set, z):
    """Density f_I(z) of the radius R_I of the subvector X_I (A = identity)."""
    idx = _check_index_set(spec, index_set)
    av = spec.alpha
    if z < 0:
        raise ArgumentError("z must be non-negative")
    ab, abi = av.bar, av.plain_sum(idx)
    beta = ab - abi
    if z == 0.0:
        e = 2.0 * abi - 1.0
        if e > 0:
            return 0.0
        if e < 0:
            return SINGULAR
    log_c = math.log(2.0) + special.gammaln(ab) - special.gammaln(abi) - special.gammaln(beta)
    kern = _radial_kernel(spec.radial, beta, ab, float(z))
    zpow = 1.0 if z == 0.0 else z ** (2.0 * abi - 1.0)
    return math.exp(log_c) * zpow * kern


def subvector_joint_density(spec, index_set, A_sub, x_I):
    """Density of A_sub^T X_I for the subvector X_I of a GSD vector."""
    idx = _check_index_set(spec, index_set)
    av = spec.alpha
    sub = MixingMatrix(np.atleast_2d(np.asarray(A_sub, dtype=float)), normalized=False)
    x = np.atleast_1d(np.asarray(x_I, dtype=float))
    m = len(idx)
    if sub.k != m or x.shape != (m,):
        raise ArgumentError(f"A_sub must be {m}x{m} and x_I must have {m} entries")
    a_sub = av.alpha[idx]
    ab, abi = av.bar, float(math.fsum(a_sub))
    beta = ab - abi
    cx = sub.C @ x
    lp = _log_abs_power_product(cx, 2.0 * a_sub - 1.0)
    if lp is SINGULAR:
        return SINGULAR
    z = math.sqrt(max(float(x @ sub.Sigma_inv @ x), 0.0))
    log_c = (
        special.gammaln(ab)
        - float(np.sum(special.gammaln(a_sub)))
        - special.gammaln(beta)
        - 0.5 * sub.log_det_Sigma
    )
    kern = _radial_kernel(spec.radial, beta, ab, z)
    return math.exp(log_c + lp) * kern

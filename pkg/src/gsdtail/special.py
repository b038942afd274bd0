"""Special-function helpers evaluated in log space."""

import math

import numpy as np
from scipy import special

# below this, log(gammaincc) loses too many digits and the continued fraction takes over
_DIRECT_FLOOR = 1e-250


def _log_q_contfrac(a, x, max_iter=500, eps=1e-16):
    # modified Lentz on the Legendre continued fraction, valid for x > a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return -x + a * math.log(x) - math.lgamma(a) + math.log(h)


def log_gammaincc(a, x):
    """Log of the regularised upper incomplete gamma function Q(a, x).

    Accurate far into the tail where ``scipy.special.gammaincc`` underflows.
    Scalar or array input (broadcast).
    """
    a_arr, x_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    direct = special.gammaincc(a_arr, x_arr)
    with np.errstate(divide="ignore"):
        # log1p(-P) keeps the digits of log Q when Q is close to 1
        out = np.where(direct > 0.5, np.log1p(-special.gammainc(a_arr, x_arr)), np.log(direct))
    deep = (direct < _DIRECT_FLOOR) & (x_arr > a_arr + 1.0)
    if np.ndim(out) == 0:
        if deep:
            return _log_q_contfrac(float(a_arr), float(x_arr))
        return float(out)
    if np.any(deep):
        out = np.array(out, dtype=float, copy=True)
        for idx in zip(*np.nonzero(deep)):
            out[idx] = _log_q_contfrac(float(a_arr[idx]), float(x_arr[idx]))
    return out


def signed_gamma_sf(shape, t):
    """P(Y > t) for Y symmetric about 0 with Y**2 ~ Gamma(shape, rate 1/2)."""
    t = np.asarray(t, dtype=float)
    upper = 0.5 * special.gammaincc(shape, 0.5 * t * t)
    out = np.where(t >= 0, upper, 1.0 - upper)
    out = np.where(np.isneginf(t), 1.0, out)
    out = np.where(np.isposinf(t), 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def log_sum_gamma(alpha):
    return float(np.sum(special.gammaln(np.asarray(alpha, dtype=float))))

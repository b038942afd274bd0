import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from gsdtail.asymptotics import (
    corollary2,
    index_split,
    orthant_probability,
    tau_JL,
    tau_L_full,
    tau_star_M,
    theorem31,
    threshold_normalize,
)
from gsdtail.errors import AmbiguityError, ArgumentError, DivergedError
from gsdtail.experiments import example1_model, example2_paper_constant
from gsdtail.model import ModelSpec
from gsdtail.qp import QpProblem, solve
from gsdtail.special import signed_gamma_sf

from _util import bivariate, random_correlation, upper_model


def split_for(spec, b):
    sol = solve(QpProblem(spec.mixing.Sigma, b))
    return sol, index_split(spec, sol)


# -- index sets -------------------------------------------------------------------


def test_split_example2_tie():
    spec = bivariate([1.0, 1.5], 0.5)
    sol, split = split_for(spec, [1.0, 0.5])
    np.testing.assert_allclose(split.Cb_star, [1.0, 0.0], atol=1e-15)
    assert split.L == (1,) and split.M == (0,)
    np.testing.assert_allclose(split.alpha_tilde, [0.5, 1.5])


def test_split_all_half_has_empty_L():
    spec = bivariate([0.5, 0.5], 0.5)
    _, split = split_for(spec, [1.0, 0.5])
    assert split.L == ()


@pytest.mark.parametrize("k,rho", [(2, 0.3), (3, -0.1), (5, 0.6)])
def test_split_example1_empty_L(k, rho):
    spec = example1_model(k, rho, 1.3)
    _, split = split_for(spec, np.ones(k))
    assert split.L == () and split.I == tuple(range(k))


def test_split_gray_zone_raises():
    rho = 0.3
    spec = bivariate([1.0, 1.5], rho)
    with pytest.raises(AmbiguityError):
        split_for(spec, [1.0, rho + 5e-9])


# -- thresholds -------------------------------------------------------------------


def test_thresholds_plain_cases():
    spec = bivariate([1.0, 1.5], 0.7)
    sol = solve(QpProblem(spec.mixing.Sigma, [1.0, 0.5]))
    th = threshold_normalize(spec, sol, [1.0, 0.5])
    assert th.q_I.tolist() == [0.0] and th.q_J.tolist() == [-np.inf]
    sol = solve(QpProblem(bivariate([1.0, 1.5], 0.0).mixing.Sigma, [1.0, 0.5]))
    th = threshold_normalize(spec, sol, [1.0, 0.5])
    assert th.q_I.tolist() == [0.0, 0.0] and th.q_J.size == 0
    sol = solve(QpProblem(bivariate([1.0, 1.5], 0.5).mixing.Sigma, [1.0, 0.5]))
    assert threshold_normalize(spec, sol, [1.0, 0.5]).q_J.tolist() == [0.0]


def test_thresholds_custom_validation():
    spec = bivariate([1.0, 1.5], 0.5)
    sol = solve(QpProblem(spec.mixing.Sigma, [1.0, 0.5]))
    with pytest.raises(ArgumentError):
        threshold_normalize(spec, sol, mode="custom", q_J=[0.1, 0.2])
    with pytest.raises(ArgumentError):
        threshold_normalize(spec, sol, mode="custom", q_I=[np.inf])
    with pytest.raises(ArgumentError):
        threshold_normalize(spec, sol, mode="bogus")


def test_threshold_at_scaling():
    spec = bivariate([1.0, 1.5], 0.5)
    sol = solve(QpProblem(spec.mixing.Sigma, [1.0, 0.5]))
    th = threshold_normalize(spec, sol, mode="custom", q_J=[0.3])
    asym = corollary2(spec, [1.0, 0.5], thresholds=th, sol=sol)
    u = 3.0
    w = spec.radial.hazard(u)
    np.testing.assert_allclose(asym.threshold_at(u), [u, 0.5 * u + 0.3 * math.sqrt(u / w)], rtol=1e-14)


# -- integrals ----------------------------------------------------------------------


def test_tau_JL_gaussian_integral():
    spec = bivariate([0.5, 0.5], 0.5)
    sol, split = split_for(spec, [1.0, 0.2])
    sigma = spec.mixing.Sigma_inv[1, 1]
    full = math.sqrt(2 * math.pi / sigma)
    assert tau_JL(spec, split, [-np.inf]) == pytest.approx(full, rel=1e-9)
    assert tau_JL(spec, split, [0.0]) == pytest.approx(full / 2, rel=1e-9)


@pytest.mark.parametrize("rho", [0.5, -0.3])
def test_tau_JL_example2_moment(rho):
    spec = bivariate([1.0, 1.5], rho)
    sol, split = split_for(spec, [1.0, rho])
    want = math.sqrt(2 * math.pi * (1 - rho * rho))
    assert tau_JL(spec, split, [-np.inf]) == pytest.approx(want, rel=1e-9)
    mc = tau_JL(spec, split, [-np.inf], method="mc", n_mc=10**6, seed=1)
    assert mc == pytest.approx(want, rel=0.01)


def test_tau_star_M_half_is_one():
    spec = ModelSpec.build([0.5, 0.5, 0.5], np.linalg.cholesky(random_correlation(np.random.default_rng(0), 3)).T)
    sol, split = split_for(spec, [1.0, 0.4, 0.8])
    assert tau_star_M(spec, sol, split) == 1.0


def test_tau_star_M_direct_product():
    rho, a, alpha = 0.0, 0.5, (1.0, 1.5)
    spec = bivariate(alpha, rho)
    sol, split = split_for(spec, [1.0, a])
    c = math.sqrt(1.25)
    cb = spec.mixing.C @ np.array([1.0, a])
    direct = np.prod([c ** (1 - 2 * al) * abs(v) ** (2 * al - 1) for al, v in zip(alpha, cb)])
    assert tau_star_M(spec, sol, split) == pytest.approx(direct, rel=1e-14)
    assert tau_star_M(spec, sol, split) == pytest.approx(c ** (2 - 5) * (a - rho) ** 2, rel=1e-14)


def test_tau_L_exponential_product():
    spec = ModelSpec.build([0.5, 0.5])
    sol, split = split_for(spec, [1.0, 1.0])
    u = np.ones(2) / math.sqrt(2)
    assert tau_L_full(spec, split, np.zeros(2), u) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("k,rho,p", [(2, 0.0, 0.5), (3, 0.4, 1.2), (4, -0.2, 0.8)])
def test_tau_L_example1_closed_form(k, rho, p):
    spec = example1_model(k, rho, p)
    one = np.ones(k)
    sol, split = split_for(spec, one)
    n1 = math.sqrt(one @ spec.mixing.Sigma_inv @ one)
    e1 = one @ spec.mixing.Sigma_inv[:, 0]
    got = tau_L_full(spec, split, np.zeros(k), one / sol.norm_bI)
    assert got == pytest.approx((n1 / e1) ** k, rel=1e-6)


def test_tau_L_nonempty_L_against_mc():
    # rho < 0 and b = (0, 1): (C b)_0 = 0 with I full, so L = {0}
    spec = bivariate([1.0, 1.5], -0.5)
    sol, split = split_for(spec, [0.0, 1.0])
    assert sol.index_I == (0, 1) and split.L == (0,)
    u = np.array([0.0, 1.0]) / sol.norm_bI
    q = np.zeros(2)
    quad = tau_L_full(spec, split, q, u, method="quadrature")
    mc = tau_L_full(spec, split, q, u, method="mc", n_mc=10**7, seed=3)
    assert mc == pytest.approx(quad, rel=0.01)
    assert tau_L_full(spec, split, q, u, method="both", n_mc=10**6) == quad


def test_tau_L_diverges():
    spec = bivariate([1.0, 1.5], 0.5)
    sol, split = split_for(spec, [1.0, 1.0])
    with pytest.raises(DivergedError):
        tau_L_full(spec, split, np.zeros(2), np.array([1.0, 0.1]))


@pytest.mark.parametrize("q", [-1.0, 0.0, 0.7])
def test_orthant_one_dimensional(q):
    spec = bivariate([1.0, 1.5], 0.5)
    sol, split = split_for(spec, [1.0, 0.5])
    want = signed_gamma_sf(1.5, q / math.sqrt(0.75))
    assert orthant_probability(spec, split, [q]) == pytest.approx(want, rel=1e-12)
    assert orthant_probability(spec, split, [q], method="mc", n_mc=10**6) == pytest.approx(want, abs=0.003)


def test_orthant_half_gaussian():
    spec = bivariate([0.5, 0.5], 0.5)
    sol, split = split_for(spec, [1.0, 0.5])
    assert orthant_probability(spec, split, [0.0]) == pytest.approx(0.5, abs=1e-14)
    assert orthant_probability(spec, split, [-np.inf]) == 1.0


@pytest.mark.parametrize("seed", [0, 1])
def test_orthant_two_dimensional_against_mc(seed):
    rng = np.random.default_rng(seed)
    spec = upper_model(rng, 3)
    b = spec.mixing.Sigma[:, 0].copy()
    sol, split = split_for(spec, b)
    assert split.J == (1, 2) and split.L == (1, 2)
    q = rng.uniform(-0.8, 0.5, size=2)
    quad = orthant_probability(spec, split, q)
    mc = orthant_probability(spec, split, q, method="mc", n_mc=10**6, seed=seed)
    assert mc == pytest.approx(quad, abs=4 * math.sqrt(quad * (1 - quad) / 1e6) + 1e-4)


# -- constants ------------------------------------------------------------------------


def test_example2_below_half_half():
    rho, a = 0.0, 0.5
    spec = bivariate([0.5, 0.5], rho)
    asym = theorem31(spec, [1.0, a])
    c = math.sqrt(1.25)
    assert asym.branch == "thm-b"
    assert asym.exponent == -1.0
    assert asym.radius_scale == pytest.approx(c, rel=1e-15)
    display = 1 / (2 * math.pi) * (1 - rho * rho) ** 1.5 / ((1 - rho * a) * (a - rho)) * c
    assert asym.ray_constant == pytest.approx(display, rel=1e-9)
    assert asym.ray_constant == pytest.approx(0.35588127, rel=1e-7)


@pytest.mark.parametrize("alpha1,alpha2,q", [(1.0, 1.5, 0.0), (0.7, 2.2, 0.4), (2.0, 0.8, -0.5)])
def test_example2_tie_display(alpha1, alpha2, q):
    rho = 0.5
    spec = bivariate([alpha1, alpha2], rho)
    sol = solve(QpProblem(spec.mixing.Sigma, [1.0, rho]))
    th = threshold_normalize(spec, sol, mode="custom", q_J=[q])
    want = 2 ** (alpha2 - 1) * math.exp(special.gammaln(alpha1 + alpha2) - special.gammaln(alpha1)) * signed_gamma_sf(
        alpha2, q / math.sqrt(1 - rho * rho)
    )
    for fn in (theorem31, corollary2):
        asym = fn(spec, [1.0, rho], thresholds=th, sol=sol)
        assert asym.exponent == pytest.approx(-alpha2, abs=1e-15)
        assert asym.ray_constant == pytest.approx(want, rel=1e-8)
        assert asym.ray_constant == pytest.approx(example2_paper_constant(alpha1, alpha2, rho, rho, q), rel=1e-8)


def test_example2_tie_q_zero_halves():
    spec = bivariate([1.0, 1.5], 0.5)
    asym = corollary2(spec, [1.0, 0.5])
    want = 2**0.5 * math.gamma(2.5) / math.gamma(1.0) / 2
    assert asym.ray_constant == pytest.approx(want, rel=1e-12)


def test_example2_above():
    spec = bivariate([1.3, 0.9], 0.7)
    asym = corollary2(spec, [1.0, 0.5])
    want = 2 ** (0.9 - 1) * math.gamma(2.2) / math.gamma(1.3)
    assert asym.ray_constant == pytest.approx(want, rel=1e-12)
    assert asym.details["orthant_probability"] == 1.0


@pytest.mark.parametrize("k,rho", [(2, 0.0), (3, 0.5), (5, -0.1)])
def test_example1_elliptical(k, rho):
    spec = example1_model(k, rho, 0.5)
    one = np.ones(k)
    asym = theorem31(spec, one)
    n1 = math.sqrt(one @ spec.mixing.Sigma_inv @ one)
    e1 = one @ spec.mixing.Sigma_inv[:, 0]
    want = math.gamma(k / 2) / (2 * math.pi ** (k / 2) * math.sqrt(spec.mixing.det_Sigma)) * n1 / e1**k
    assert asym.exponent == 1 - k
    assert asym.ray_constant == pytest.approx(want, rel=1e-6)


def test_corollary_reduces_to_theorem_single_J_empty_L():
    rng = np.random.default_rng(2)
    spec = ModelSpec.build([0.5, 0.5, 0.5], np.linalg.cholesky(random_correlation(rng, 3)).T)
    b = np.array([1.0, 0.9, -3.0])
    sol = solve(QpProblem(spec.mixing.Sigma, b))
    assert sol.index_J == (2,)
    t, c = theorem31(spec, b, sol=sol), corollary2(spec, b, sol=sol)
    assert c.details["orthant_probability"] == 1.0
    assert c.constant == pytest.approx(t.constant, rel=1e-8)


def test_log_value_consistency():
    spec = bivariate([1.0, 1.5], 0.0)
    asym = theorem31(spec, [1.0, 0.5])
    for u in (2.0, 5.0):
        assert asym.evaluate(u) == pytest.approx(math.exp(asym.log_value(u)), rel=1e-14)
    deep = asym.log_value(200.0)
    assert math.isfinite(deep) and deep < -10000


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_exponent_formula_random(seed):
    rng = np.random.default_rng(seed)
    spec = upper_model(rng, 3)
    S = spec.mixing.Sigma
    b = np.array([1.0, S[1, 0] - rng.uniform(0.1, 1.0), S[2, 0]])
    sol = solve(QpProblem(S, b))
    asym = theorem31(spec, b, sol=sol)
    s = asym.split
    abar_L = float(np.sum(spec.alpha.alpha[list(s.L)]))
    want = 1 - len(s.I) - len(s.J) / 2 + len(s.L) / 2 - abar_L
    assert asym.exponent == pytest.approx(want, abs=1e-14)
    assert asym.constant > 0


def test_to_dict_keys():
    d = theorem31(bivariate([1.0, 1.5], 0.0), [1.0, 0.5]).to_dict()
    for key in ("branch", "I", "J", "L", "M", "constant", "exponent", "radius_scale"):
        assert key in d

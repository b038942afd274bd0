import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from gsdtail.errors import ArgumentError, ModelValidationError, UnsupportedCaseError
from gsdtail.model import (
    SINGULAR,
    AlphaVector,
    KotzParams,
    MixingMatrix,
    ModelSpec,
    gsd_joint_density,
    kotz_density,
    kotz_generator,
    radial_density_from_generator,
    sd_density,
    subvector_joint_density,
    subvector_radial_density,
)
from gsdtail.radial import ChiRadial, KotzRadial

from _util import random_correlation

STD = KotzParams()


def abs_gamma_root_pdf(alpha, x):
    # density of X with X symmetric and X^2 ~ Gamma(alpha, rate 1/2)
    return np.abs(x) * stats.gamma.pdf(x * x, alpha, scale=2.0)


# -- validation ---------------------------------------------------------------


class TestValidation:
    def test_alpha_must_be_positive(self):
        with pytest.raises(ArgumentError):
            AlphaVector([1.0, 0.0])

    def test_k_at_least_two(self):
        with pytest.raises(ModelValidationError) as exc:
            ModelSpec.build([1.0])
        assert exc.value.invariant == "k_at_least_2"

    def test_singular_A(self):
        with pytest.raises(ModelValidationError) as exc:
            MixingMatrix(np.array([[1.0, 1.0], [1.0, 1.0]]) / math.sqrt(2))
        assert exc.value.invariant == "A_nonsingular"

    def test_unit_diagonal_enforced_with_opt_out(self):
        A = np.diag([2.0, 1.0])
        with pytest.raises(ModelValidationError) as exc:
            MixingMatrix(A)
        assert exc.value.invariant == "unit_diagonal"
        mm = MixingMatrix(A, normalized=False)
        assert mm.det_Sigma == pytest.approx(4.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ModelValidationError) as exc:
            ModelSpec(AlphaVector([1, 1, 1]), MixingMatrix(np.eye(2)), KotzRadial.standardized(3.0))
        assert exc.value.invariant == "dimension_consistency"

    def test_alpha_bar_mismatch(self):
        with pytest.raises(ModelValidationError):
            ModelSpec.build([1.0, 1.0], radial=KotzRadial.standardized(3.0))

    def test_ill_conditioned(self):
        eps = 1e-13
        A = np.array([[1.0, 1.0 - eps], [0.0, math.sqrt(1 - (1 - eps) ** 2)]])
        with pytest.raises(ModelValidationError):
            MixingMatrix(A)

    def test_empty_set_conventions(self):
        av = AlphaVector([0.5, 1.5, 2.0])
        assert av.partial_sum([]) == 1.0
        assert av.plain_sum([]) == 0.0
        assert av.partial_sum([1, 2]) == 3.5
        assert av.bar == 4.0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_mixing_invariants(k, seed):
    rng = np.random.default_rng(seed)
    S = random_correlation(rng, k)
    mm = MixingMatrix(np.linalg.cholesky(S).T)
    np.testing.assert_allclose(mm.Sigma, S, atol=1e-12)
    np.testing.assert_allclose(mm.C.T @ mm.C, mm.Sigma_inv, atol=1e-10 * np.abs(mm.Sigma_inv).max())
    assert mm.det_Sigma == pytest.approx(np.linalg.det(S), rel=1e-10)
    assert mm.log_det_Sigma == pytest.approx(math.log(mm.det_Sigma), abs=1e-10)


def test_json_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    spec = ModelSpec.build([0.7, 1.2, 2.0], np.linalg.cholesky(random_correlation(rng, 3)).T)
    again = ModelSpec.from_json(spec.to_json())
    assert again.to_json() == spec.to_json()
    path = tmp_path / "m.json"
    path.write_text(spec.to_json())
    assert ModelSpec.load(path).to_dict() == spec.to_dict()
    chi = ModelSpec.build([0.5, 0.5], radial=ChiRadial(2))
    assert ModelSpec.from_dict(json.loads(chi.to_json())).radial == ChiRadial(2)


def test_json_missing_key():
    with pytest.raises(ModelValidationError):
        ModelSpec.from_dict({"alpha": [1, 1]})
    with pytest.raises(ArgumentError):
        ModelSpec.from_json("{not json")


# -- SD density --------------------------------------------------------------


def test_sd_density_uniform_circle():
    assert sd_density([0.5, 0.5], [0.0]) == pytest.approx(1.0 / math.pi, rel=1e-14)


def test_sd_density_zero_factor():
    assert sd_density([1.0, 1.0], [0.0]) == 0.0


def test_sd_density_singular_at_zero():
    assert sd_density([0.3, 1.0], [0.0]) is SINGULAR
    assert float(SINGULAR) == math.inf


def test_sd_density_outside_ball():
    assert sd_density([1.0, 1.0, 1.0], [0.8, 0.8]) == 0.0


@pytest.mark.parametrize("alpha", [(0.5, 0.5, 0.5), (1.0, 1.5, 0.7), (0.6, 2.0, 1.3)])
def test_sd_density_normalises(alpha):
    # polar coordinates: radial part r^(2a1+2a2-1)(1-r^2)^(a3-1), angular part |cos|^(2a1-1)|sin|^(2a2-1)
    a1, a2, a3 = alpha
    def smooth(t):
        c = math.cos(t) / (math.pi / 2 - t) if t < math.pi / 2 else 1.0
        s = math.sin(t) / t if t > 0 else 1.0
        return c ** (2 * a1 - 1) * s ** (2 * a2 - 1)

    ang, _ = integrate.quad(smooth, 0, math.pi / 2, weight="alg", wvar=(2 * a2 - 1, 2 * a1 - 1))
    rad, _ = integrate.quad(lambda r: (1 + r) ** (a3 - 1), 0, 1, weight="alg", wvar=(2 * a1 + 2 * a2 - 1, a3 - 1))
    # the density evaluated through sd_density at an interior point fixes the constant
    u = np.array([0.3, 0.4])
    r, t = 0.5, math.atan2(0.4, 0.3)
    kernel = math.cos(t) ** (2 * a1 - 1) * math.sin(t) ** (2 * a2 - 1) * r ** (2 * a1 + 2 * a2 - 2) * (1 - r * r) ** (a3 - 1)
    const = sd_density(alpha, u) / kernel
    assert const * 4 * ang * rad == pytest.approx(1.0, abs=1e-6)


def test_sd_density_value_three_halves():
    assert sd_density([0.5] * 3, [0.5, 0.5]) == pytest.approx(1 / (2 * math.pi) / math.sqrt(0.5), rel=1e-13)


# -- joint and Kotz densities ---------------------------------------------------


def test_generator_density_at_origin():
    g = kotz_generator([0.5, 0.5], STD)
    assert gsd_joint_density([0.5, 0.5], g, [0.0, 0.0]) == pytest.approx(1 / (2 * math.pi), rel=1e-14)


def test_joint_density_vanishes_on_axis():
    g = kotz_generator([1.0, 0.5], STD)
    assert gsd_joint_density([1.0, 0.5], g, [0.0, 0.4]) == 0.0


def test_joint_density_rejects_general_A():
    spec = ModelSpec.build([1.0, 1.0], np.array([[1.0, 0.5], [0.0, math.sqrt(0.75)]]))
    with pytest.raises(UnsupportedCaseError):
        gsd_joint_density(spec, kotz_generator(spec.alpha, STD), [0.1, 0.2])


def test_kotz_density_value_alpha_one():
    spec = ModelSpec.build([1.0, 1.0])
    assert kotz_density(spec, STD, [1.0, 1.0]) == pytest.approx(math.exp(-1) / 4, rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0.01, 3), st.floats(0.01, 3), st.booleans(), st.booleans())
def test_standardized_kotz_has_independent_components(a1, a2, x1, x2, neg1, neg2):
    x1, x2 = (-x1 if neg1 else x1), (-x2 if neg2 else x2)
    spec = ModelSpec.build([a1, a2])
    got = kotz_density(spec, STD, [x1, x2])
    want = abs_gamma_root_pdf(a1, x1) * abs_gamma_root_pdf(a2, x2)
    assert got == pytest.approx(want, rel=1e-10)


def test_standardized_kotz_on_axis():
    assert kotz_density(ModelSpec.build([0.3, 1.0]), STD, [0.0, 1.0]) is SINGULAR
    assert kotz_density(ModelSpec.build([0.7, 1.0]), STD, [0.0, 1.0]) == 0.0


def test_kotz_paths_agree():
    rng = np.random.default_rng(1)
    spec = ModelSpec.build([1.0, 1.5])
    g = kotz_generator(spec.alpha, STD)
    for x in rng.normal(size=(10, 2)):
        assert gsd_joint_density(spec, g, x) == pytest.approx(kotz_density(spec, STD, x), rel=1e-12)


def _integrate_2d(f):
    # the density has |x_i| powers: integrate per quadrant with break points at 0
    total = 0.0
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            val, _ = integrate.dblquad(lambda y, x: f(np.array([s1 * x, s2 * y])), 0, 12, 0, 12, epsabs=1e-11, epsrel=1e-10)
            total += val
    return total


def test_kotz_density_integrates_to_one_correlated():
    A = np.array([[1.0, 0.4], [0.0, math.sqrt(1 - 0.16)]])
    spec = ModelSpec.build([1.0, 1.5], A)
    assert _integrate_2d(lambda x: kotz_density(spec, STD, x)) == pytest.approx(1.0, abs=1e-6)


def test_general_kotz_integrates_to_one():
    spec = ModelSpec.build([1.0, 1.5])
    kp = KotzParams(N=0.7, r=1.3, s=0.8)
    assert _integrate_2d(lambda x: kotz_density(spec, kp, x)) == pytest.approx(1.0, abs=1e-6)


def test_general_kotz_needs_identity():
    spec = ModelSpec.build([1.0, 1.0], np.array([[1.0, 0.5], [0.0, math.sqrt(0.75)]]))
    with pytest.raises(UnsupportedCaseError):
        kotz_density(spec, KotzParams(N=1.0), [0.1, 0.1])


def test_radial_density_chi2():
    g = kotz_generator([0.5, 0.5], STD)
    assert radial_density_from_generator(g, [0.5, 0.5], 1.0) == pytest.approx(math.exp(-0.5), rel=1e-14)


@pytest.mark.parametrize("alpha,kp", [((0.5, 0.5), STD), ((1.0, 1.5, 0.3), KotzParams(1.0, 2.0, 0.7))])
def test_radial_density_integrates_to_one(alpha, kp):
    g = kotz_generator(alpha, kp)
    val, _ = integrate.quad(lambda r: radial_density_from_generator(g, alpha, r), 0, np.inf, limit=200)
    assert val == pytest.approx(1.0, abs=1e-6)


# -- subvectors ----------------------------------------------------------------


def test_subvector_radial_half_normal():
    spec = ModelSpec.build([0.5, 0.5], radial=ChiRadial(2))
    assert subvector_radial_density(spec, [0], 1.0) == pytest.approx(2 / math.sqrt(2 * math.pi) * math.exp(-0.5), rel=1e-8)
    assert subvector_radial_density(spec, [0], 1.0) == pytest.approx(0.48394, abs=1e-5)


def test_subvector_radial_integrates_to_one():
    spec = ModelSpec.build([0.8, 1.5, 0.6])
    val, _ = integrate.quad(lambda z: subvector_radial_density(spec, [0, 2], z), 0, np.inf, limit=200)
    assert val == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("z", [0.5, 1.0, 2.0])
def test_subvector_radial_matches_gamma_root(z):
    spec = ModelSpec.build([1.3, 0.9])
    want = 2 * abs_gamma_root_pdf(1.3, z)
    assert subvector_radial_density(spec, [0], z) == pytest.approx(want, rel=1e-6)


def test_subvector_joint_normal():
    spec = ModelSpec.build([0.5, 0.5], radial=ChiRadial(2))
    assert subvector_joint_density(spec, [0], [[1.0]], [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-8)
    val, _ = integrate.quad(lambda x: subvector_joint_density(spec, [0], [[1.0]], [x]), -np.inf, np.inf)
    assert val == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("x", [-1.2, 0.4, 2.0])
def test_subvector_joint_is_marginal(x):
    spec = ModelSpec.build([1.0, 1.5, 0.7])
    g = kotz_generator(spec.alpha, STD)
    marg, _ = integrate.dblquad(
        lambda y, z: gsd_joint_density(spec, g, np.array([x, y, z])), -12, 12, -12, 12, epsabs=1e-10
    )
    assert subvector_joint_density(spec, [0], [[1.0]], [x]) == pytest.approx(marg, abs=1e-4)


def test_subvector_index_checks():
    spec = ModelSpec.build([1.0, 1.0])
    with pytest.raises(ArgumentError):
        subvector_radial_density(spec, [0, 1], 1.0)
    with pytest.raises(ArgumentError):
        subvector_radial_density(spec, [], 1.0)

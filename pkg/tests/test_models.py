import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from axialunif.models import (
    LINEAR,
    WATSON,
    AngularFunction,
    AxialModel,
    AxialSampler,
    DegenerateModelError,
    SphericalSample,
    density,
    moment_gf,
    moment_integral,
    normalizing_constant,
    sample_axial,
    sample_uniform_sphere,
    uniform_constant,
)
from axialunif.numerics import RngStream


def quad_constant(p, kappa, f=np.exp):
    val, _ = integrate.quad(lambda s: (1 - s * s) ** ((p - 3) / 2) * f(kappa * s * s), -1, 1,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return 1.0 / val


def random_unit(rng, p):
    v = rng.standard_normal(p)
    return v / np.linalg.norm(v)


class TestConstants:
    def test_uniform_closed_forms(self):
        assert abs(normalizing_constant(3, 0.0) - 0.5) < 1e-15
        assert abs(normalizing_constant(2, 0.0, LINEAR) - 1 / math.pi) < 1e-15
        assert abs(uniform_constant(2) - 0.31831) < 1e-5

    @pytest.mark.parametrize("p", [2, 3, 4, 7, 10])
    def test_uniform_constant_matches_quadrature(self, p):
        from axialunif.models import _sphere_integral
        assert abs(1 / _sphere_integral(p, lambda z: np.ones_like(z)) - uniform_constant(p)) < 1e-12

    def test_watson_p3_kappa1(self):
        val, _ = integrate.quad(lambda s: math.exp(s * s), -1, 1, epsabs=1e-12, epsrel=1e-12)
        assert abs(normalizing_constant(3, 1.0) - 1 / val) < 1e-10

    @pytest.mark.parametrize("p", [3, 5, 10])
    @pytest.mark.parametrize("kappa", [-5.0, -0.5, 0.3, 2.0, 20.0])
    def test_watson_against_adaptive_quadrature(self, p, kappa):
        ref = quad_constant(p, kappa)
        assert abs(normalizing_constant(p, kappa) - ref) < 1e-10 * max(1.0, ref)

    def test_p2_endpoint_singularity(self):
        # (1 - s^2)^(-1/2) e^(kappa s^2) integrates to pi * exp(kappa/2) * I0(kappa/2)
        from scipy.special import i0
        for kappa in (0.5, 3.0, -2.0):
            ref = 1 / (math.pi * math.exp(kappa / 2) * i0(kappa / 2))
            assert abs(normalizing_constant(2, kappa) - ref) < 1e-12

    def test_linear_f(self):
        ref = quad_constant(4, 0.7, lambda z: 1 + z)
        assert abs(normalizing_constant(4, 0.7, LINEAR) - ref) < 1e-11

    def test_continuity_at_zero(self):
        gaps = [abs(normalizing_constant(3, k) - uniform_constant(3)) for k in (1, 0.1, 0.01)]
        assert gaps[0] > gaps[1] > gaps[2]


class TestDensity:
    def test_uniform_value(self):
        rng = np.random.default_rng(0)
        for p in (2, 3, 6):
            model = AxialModel.standard(p)
            ref = math.gamma(p / 2) / (2 * math.pi ** (p / 2))
            for _ in range(5):
                assert abs(density(model, random_unit(rng, p)) - ref) < 1e-14

    def test_antipodal(self):
        rng = np.random.default_rng(1)
        model = AxialModel(4, random_unit(rng, 4), 2.5)
        x = np.array([random_unit(rng, 4) for _ in range(20)])
        assert np.array_equal(density(model, x), density(model, -x))

    def test_ratio_is_e(self):
        model = AxialModel.standard(3, 1.0)
        r = density(model, [1.0, 0, 0]) / density(model, [0, 1.0, 0])
        assert abs(r - math.e) < 1e-13

    def test_integrates_to_one_p3(self):
        # surface integral in spherical coordinates about e_1
        model = AxialModel.standard(3, 2.0)
        val, _ = integrate.quad(
            lambda t: 2 * math.pi * math.sin(t) * density(model, [math.cos(t), math.sin(t), 0.0]),
            0, math.pi)
        assert abs(val - 1) < 1e-10

    def test_non_unit_rejected(self):
        with pytest.raises(ValueError):
            density(AxialModel.standard(3), [1.0, 1.0, 0.0])


class TestModelValidation:
    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            AxialModel(1, np.array([1.0]))

    def test_theta_unit(self):
        with pytest.raises(ValueError):
            AxialModel(3, np.array([1.0, 1e-5, 0.0]))

    def test_linear_positivity(self):
        AxialModel.standard(3, -0.9, LINEAR)
        with pytest.raises(DegenerateModelError):
            AxialModel.standard(3, -1.0, LINEAR)

    def test_custom_monotonicity(self):
        bumpy = AngularFunction(lambda z: 1 + np.sin(z), 1.0, 0.0, "bumpy")
        AxialModel.standard(3, 1.0, bumpy)
        with pytest.raises(DegenerateModelError):
            AxialModel.standard(3, 3.0, bumpy)

    def test_builtins(self):
        assert WATSON(0.0) == 1 and WATSON.d1_at_0 == 1 and WATSON.d2_at_0 == 1
        assert LINEAR(0.0) == 1 and LINEAR.d1_at_0 == 1 and LINEAR.d2_at_0 == 0

    def test_sample_validation(self):
        with pytest.raises(ValueError):
            SphericalSample(np.array([[2.0, 0.0, 0.0]]))
        s = SphericalSample.from_array(np.array([[2.0, 0.0, 0.0]]), renormalize=True)
        assert np.array_equal(s.points, [[1.0, 0.0, 0.0]])
        with pytest.raises(ValueError):
            SphericalSample.from_array(np.zeros((1, 3)), renormalize=True)
        with pytest.raises(ValueError):
            SphericalSample(np.array([[1.0]]))


@pytest.fixture(scope="module")
def proj():
    return sample_uniform_sphere(3, 1_000_000, RngStream(5)).points[:, 0]


class TestUniformSampler:
    def test_norms(self):
        s = sample_uniform_sphere(7, 1000, RngStream(1))
        assert np.max(np.abs(np.linalg.norm(s.points, axis=1) - 1)) < 1e-12

    def test_second_moment(self, proj):
        assert abs(np.mean(proj ** 2) - 1 / 3) < 0.002

    def test_fourth_moment(self, proj):
        assert abs(np.mean(proj ** 4) - 0.2) < 0.002


class TestAxialSampler:
    @pytest.mark.parametrize("p", [2, 3, 8])
    def test_null_beta_law(self, p):
        s = sample_axial(AxialModel.standard(p), 100_000, RngStream(p))
        ks = stats.kstest(s.points[:, 0] ** 2, stats.beta(0.5, (p - 1) / 2).cdf).statistic
        assert ks < 0.01

    def test_watson_moment(self):
        n = 200_000
        s = sample_axial(AxialModel.standard(3, 3.0), n, RngStream(8))
        z = s.points[:, 0] ** 2
        g = moment_gf(3, 3.0)
        assert abs(z.mean() - g) < 0.003
        assert abs(z.mean() - g) < 3 * z.std() / math.sqrt(n)

    @pytest.mark.parametrize("kappa", [-6.0, -1.0, 4.0])
    def test_moment_matching_general(self, kappa):
        n = 100_000
        s = sample_axial(AxialModel.standard(5, kappa), n, RngStream(9))
        z = s.points[:, 0] ** 2
        assert abs(z.mean() - moment_gf(5, kappa)) < 3 * z.std() / math.sqrt(n)

    def test_linear_model_moment(self):
        n = 100_000
        s = sample_axial(AxialModel.standard(3, 5.0, LINEAR), n, RngStream(10))
        z = s.points[:, 0] ** 2
        assert abs(z.mean() - moment_gf(3, 5.0, LINEAR)) < 3 * z.std() / math.sqrt(n)

    def test_antipodal_balance(self):
        rng = np.random.default_rng(2)
        s = sample_axial(AxialModel(4, random_unit(rng, 4), 5.0), 100_000, RngStream(3))
        assert np.all(np.abs(s.points.mean(axis=0)) < 0.01)

    def test_rotational_symmetry(self):
        rng = np.random.default_rng(4)
        theta = random_unit(rng, 4)
        a = sample_axial(AxialModel.standard(4, 2.0), 100_000, RngStream(1)).points[:, 0]
        b = sample_axial(AxialModel(4, theta, 2.0), 100_000, RngStream(2)).points @ theta
        assert stats.ks_2samp(a, b).statistic < 0.01

    def test_complement_direction_uniform(self):
        # the component orthogonal to theta must have no preferred direction
        rng = np.random.default_rng(6)
        theta = random_unit(rng, 3)
        x = sample_axial(AxialModel(3, theta, 3.0), 200_000, RngStream(4)).points
        resid = x - np.outer(x @ theta, theta)
        C = resid.T @ resid / len(x)
        P = np.eye(3) - np.outer(theta, theta)
        assert np.max(np.abs(C - np.trace(C) / 2 * P)) < 0.005

    def test_determinism(self):
        m = AxialModel.standard(3, 1.0)
        a = sample_axial(m, 50, RngStream(7, 3)).points
        b = AxialSampler(m).draw(50, RngStream(7, 3))
        assert np.array_equal(a, b)

    def test_unit_norms(self):
        x = sample_axial(AxialModel.standard(6, 10.0), 5000, RngStream(0)).points
        assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1)) < 1e-12


class TestMoments:
    @pytest.mark.parametrize("p", [2, 3, 10])
    def test_gf_at_zero(self, p):
        assert moment_gf(p, 0.0) == 1 / p

    @pytest.mark.parametrize("p", [2, 3, 5, 10])
    def test_gf_derivative_is_null_variance(self, p):
        h = 1e-4
        d = (moment_gf(p, h) - moment_gf(p, -h)) / (2 * h)
        assert abs(d - 2 * (p - 1) / (p * p * (p + 2))) < 1e-5

    def test_gf_increasing(self):
        assert moment_gf(3, 10.0) > 1 / 3
        ks = np.linspace(-10, 10, 21)
        assert np.all(np.diff([moment_gf(4, k) for k in ks]) > 0)

    def test_gf_against_quad(self):
        num, _ = integrate.quad(lambda s: s * s * math.exp(2.5 * s * s), -1, 1, epsabs=1e-13)
        den, _ = integrate.quad(lambda s: math.exp(2.5 * s * s), -1, 1, epsabs=1e-13)
        assert abs(moment_gf(3, 2.5) - num / den) < 1e-11

    @pytest.mark.parametrize("p", [2, 3, 10])
    @pytest.mark.parametrize("kappa", [0.02, 0.5, 3.0])
    def test_moment_integral_polynomials(self, p, kappa):
        assert abs(moment_integral(p, kappa, np.ones_like) - 1) < 1e-12
        assert abs(moment_integral(p, kappa, lambda z: z) - kappa / p) < 1e-9
        assert abs(moment_integral(p, kappa, lambda z: z * z)
                   - 3 * kappa ** 2 / (p * (p + 2))) < 1e-9

    @pytest.mark.parametrize("p", [2, 3, 10])
    def test_expansion_rate(self, p):
        errs = []
        for k in (0.5, 0.1, 0.02):
            R = moment_integral(p, k, np.exp)
            errs.append(abs(R - 1 - k / p - 3 * k * k / (2 * p * (p + 2))) / k ** 2)
        assert errs[0] > errs[1] > errs[2]


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.floats(-8, 8))
def test_constant_positive_and_matches_quad(p, kappa):
    c = normalizing_constant(p, kappa)
    assert c > 0
    assert abs(c - quad_constant(p, kappa)) < 1e-9 * max(1.0, c)

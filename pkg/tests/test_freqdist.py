import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import wofz

from kurograph import freqdist as fd
from kurograph.errors import ModelAssumptionError, PreconditionError


def oracle_D(lam, sigma=1.0):
    """Entire extension of int g/(lam - i w) for g = N(0, sigma^2), via the Faddeeva function."""
    return math.sqrt(math.pi / 2) / sigma * wofz(1j * lam / (math.sqrt(2) * sigma))


@pytest.mark.parametrize("lam", [0.5, 1e-3, 2.0 + 1.5j, 0.01 - 3j, 4.0])
def test_d_integral_matches_faddeeva(normal_model, lam):
    assert fd.d_integral(normal_model, lam) == pytest.approx(oracle_D(lam), abs=1e-10)


@pytest.mark.parametrize("lam", [-0.3, -1.2 + 0.4j, -1e-4 + 0.2j, -0.7286])
def test_continuation_matches_faddeeva(normal_model, lam):
    assert fd.d_continuation(normal_model, lam) == pytest.approx(oracle_D(lam), abs=1e-9)


def test_normal_sigma_scaling():
    m = fd.normal(2.0)
    assert fd.d_integral(m, 0.7 + 0.2j) == pytest.approx(oracle_D(0.7 + 0.2j, 2.0), abs=1e-10)


def test_axis_boundary_value_is_sokhotski(normal_model):
    # right limit on the axis: pi g(y) - i pi H[g](y)
    y = 0.8
    val = fd.d_continuation(normal_model, 1j * y)
    assert val.real == pytest.approx(math.pi * float(normal_model.density(y)), abs=1e-12)
    assert val.imag == pytest.approx(-math.pi * fd.hilbert_transform(normal_model.density, y), abs=1e-8)
    assert val == pytest.approx(oracle_D(1j * y), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(-4, 4))
def test_continuity_across_axis(normal_model, y):
    right = fd.d_continuation(normal_model, complex(1e-6, y))
    left = fd.d_continuation(normal_model, complex(-1e-6, y))
    on = fd.d_continuation(normal_model, complex(0, y))
    assert abs(right - left) <= 1e-4
    assert abs(right - on) <= 1e-4


def test_derivative_matches_finite_difference(normal_model):
    for lam in (0.4, -0.5 + 0.3j, 1e-4j):
        h = 1e-5
        fdiff = (oracle_D(lam + h) - oracle_D(lam - h)) / (2 * h)
        assert fd.d_continuation_derivative(normal_model, lam) == pytest.approx(fdiff, abs=1e-7)


def test_d_integral_requires_right_half_plane(normal_model):
    with pytest.raises(PreconditionError):
        fd.d_integral(normal_model, -0.1)


def test_hilbert_transform_lorentzian():
    f = lambda s: 1.0 / (1.0 + s * s)
    for y in (0.0, 0.5, 2.0):
        # H f(y) = pi^-1 PV int f(s)/(y - s) ds = y / (1 + y^2)
        assert fd.hilbert_transform(f, y) == pytest.approx(y / (1 + y * y), abs=1e-9)


def test_constants_standard_normal(normal_model):
    assert normal_model.g0 == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert fd.g1(normal_model) == pytest.approx(1.0, abs=1e-9)
    assert fd.g2(normal_model) == pytest.approx(-math.pi / (2 * math.sqrt(2 * math.pi)), abs=1e-14)
    # g1 = -1 / D'(0+)
    dprime = fd.d_continuation_derivative(normal_model, 1e-9)
    assert fd.g1(normal_model) == pytest.approx(-1.0 / dprime.real, rel=1e-6)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.5])
def test_g1_scales_like_variance(sigma):
    assert fd.g1(fd.normal(sigma)) == pytest.approx(sigma ** 2, rel=1e-8)


def sech_model():
    g = lambda w: 0.5 / np.cosh(w) ** 2
    d1 = lambda w: -np.tanh(w) / np.cosh(w) ** 2
    d2 = lambda w: (2 * np.tanh(w) ** 2 - 1 / np.cosh(w) ** 2) / np.cosh(w) ** 2
    return fd.custom(g, d1, d2, half_width=40.0)


def test_custom_density():
    m = sech_model()
    assert m.g0 == pytest.approx(0.5)
    assert fd.g2(m) == pytest.approx(-math.pi / 2)
    x, w = m.quadrature(200)
    assert np.sum(w) == pytest.approx(1.0, abs=1e-8)
    assert m.sigma == pytest.approx(math.pi / (2 * math.sqrt(3)), rel=1e-4)
    s = fd.sample_frequencies(m, 20000, 5)
    assert abs(np.mean(s)) < 0.03


def test_custom_density_validation():
    g = lambda w: np.exp(-(w - 0.3) ** 2 / 2) / math.sqrt(2 * math.pi)
    with pytest.raises(ModelAssumptionError):
        fd.custom(g, g, g)
    flat = lambda w: np.exp(-np.asarray(w) ** 4) / 1.8128049541109541
    with pytest.raises(ModelAssumptionError):
        fd.g2(fd.custom(flat, lambda w: -4 * np.asarray(w) ** 3 * flat(w), lambda w: 0 * flat(w)))
    with pytest.raises(ModelAssumptionError):
        fd.normal(-1.0)


def test_quadrature_moments(normal_model):
    x, w = normal_model.quadrature(40)
    assert np.sum(w) == pytest.approx(1.0, abs=1e-14)
    assert np.sum(w * x * x) == pytest.approx(1.0, abs=1e-13)
    assert np.sum(w * x ** 4) == pytest.approx(3.0, abs=1e-12)


def test_shifted_contour_is_exact_for_analytic_data(normal_model):
    z, w = normal_model.contour_quadrature(40, 1.0)
    assert np.allclose(z.imag, 1.0)
    for t in (0.0, 1.0, 3.0):
        assert np.sum(w * np.exp(1j * z * t)) == pytest.approx(math.exp(-t * t / 2), abs=1e-12)
    assert np.sum(w * z ** 2) == pytest.approx(1.0, abs=1e-12)


def test_sampling_reproducible(normal_model):
    a = fd.sample_frequencies(normal_model, 1000, 3)
    b = fd.sample_frequencies(normal_model, 1000, 3)
    assert np.array_equal(a, b)
    s = fd.sample_frequencies(fd.normal(2.0), 200000, 1)
    assert np.std(s) == pytest.approx(2.0, rel=0.01)

import numpy as np
import pytest
from scipy.integrate import quad

from colwave.coefficients import (
    CoeffAntideriv,
    CumulativeIntegral,
    PiecewiseConstantCoeff,
    RegularizedCoeff,
)
from colwave.mollifier import Mollifier, ScaleFn


@pytest.fixture
def jump12():
    return PiecewiseConstantCoeff((0.0,), (1.0, 2.0), "space")


@pytest.fixture
def rc(jump12):
    return RegularizedCoeff(jump12, Mollifier(), ScaleFn("standard"), 0.05)


def test_base_validation():
    with pytest.raises(ValueError):
        PiecewiseConstantCoeff((0.0,), (1.0,))  # too few values
    with pytest.raises(ValueError):
        PiecewiseConstantCoeff((0.0,), (1.0, -2.0))
    with pytest.raises(ValueError):
        PiecewiseConstantCoeff((1.0, 0.0), (1.0, 2.0, 3.0))


def test_sharp_eval(jump12):
    assert jump12(-0.5) == 1.0
    assert jump12(0.5) == 2.0
    assert jump12(0.0) == 1.5  # midpoint on the jump


def test_sandwich_bounds(rc):
    xs = np.linspace(-1.0, 1.0, 2001)
    c = rc(xs)
    assert np.all(c >= rc.b0 - 1e-14)
    assert np.all(c <= rc.b1 + 1e-14)
    # saturates exactly outside the kernel neighborhood
    assert rc(-0.051) == 1.0
    assert rc(0.051) == 2.0
    assert rc(0.0) == pytest.approx(1.5, abs=1e-14)


def test_deriv_matches_fd(rc):
    xs = np.linspace(-0.04, 0.04, 33)
    step = 1e-7
    fd = (rc(xs + step) - rc(xs - step)) / (2 * step)
    assert np.allclose(rc.deriv(xs, 1), fd, rtol=1e-5, atol=1e-4)


def test_deriv_scaling_law(jump12):
    # peak of c' is (c1-c0) * phi(0) / h
    m = Mollifier()
    for eps in (0.1, 0.02):
        r = RegularizedCoeff(jump12, m, ScaleFn("standard"), eps)
        assert r.deriv(0.0, 1) == pytest.approx((2.0 - 1.0) * (15.0 / 16.0) / eps, rel=1e-12)


def test_antideriv_vs_quadrature(rc):
    ca = CoeffAntideriv(rc)
    # frozen from an independent adaptive quadrature of 1/c_eps
    assert ca(1.0) == pytest.approx(0.5023214370944632, abs=1e-11)
    for x in (-1.3, -0.02, 0.017, 0.8):
        ref, err = quad(lambda y: 1.0 / rc(y), 0.0, x, points=[-0.05, 0.0, 0.05], limit=200)
        assert ca(x) == pytest.approx(ref, abs=1e-10)


def test_antideriv_inverse_roundtrip(rc):
    ca = CoeffAntideriv(rc)
    xs = np.linspace(-2.0, 2.0, 101)
    back = ca.invert(ca(xs))
    assert np.max(np.abs(back - xs)) < 1e-10


def test_antideriv_strictly_increasing(rc):
    ca = CoeffAntideriv(rc)
    xs = np.linspace(-0.3, 0.3, 301)
    assert np.all(np.diff(ca(xs)) > 0)


def test_cumulative_value_and_square():
    base = PiecewiseConstantCoeff((1.0,), (1.0, 2.0), "time")
    r = RegularizedCoeff(base, Mollifier(), ScaleFn("standard"), 0.05)
    T = CumulativeIntegral(r, integrand="value")
    # outside the window the speed is exactly piecewise constant
    assert T(0.9) == pytest.approx(0.9, abs=1e-12)
    assert T(2.0) == pytest.approx(1.0 * 1.0 + 0.5 * (1.0 + 2.0) * 0.0 + 2.0, abs=1e-3)
    ref, _ = quad(lambda s: r(s), 0.0, 2.0, points=[0.95, 1.0, 1.05], limit=200)
    assert T(2.0) == pytest.approx(ref, abs=1e-10)
    S = CumulativeIntegral(r, integrand="square")
    ref2, _ = quad(lambda s: r(s) ** 2, 0.0, 2.0, points=[0.95, 1.0, 1.05], limit=200)
    assert S(2.0) == pytest.approx(ref2, abs=1e-10)


def test_time_variable_tagging():
    base = PiecewiseConstantCoeff((1.0,), (1.0, 2.0), "time")
    assert base.variable == "time"
    with pytest.raises(ValueError):
        PiecewiseConstantCoeff((1.0,), (1.0, 2.0), "frequency")


def test_multiple_jumps():
    base = PiecewiseConstantCoeff((-1.0, 1.0), (1.0, 3.0, 2.0), "space")
    r = RegularizedCoeff(base, Mollifier(), ScaleFn("standard"), 0.1)
    assert r(-2.0) == 1.0
    assert r(0.0) == 3.0
    assert r(2.0) == 2.0
    ca = CoeffAntideriv(r)
    ref, _ = quad(lambda y: 1.0 / r(y), 0.0, 2.5, points=[0.9, 1.0, 1.1], limit=200)
    assert ca(2.5) == pytest.approx(ref, abs=1e-10)
    assert ca.invert(ca(2.5)) == pytest.approx(2.5, abs=1e-10)

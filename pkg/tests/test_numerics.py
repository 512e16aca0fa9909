import math

import numpy as np
import pytest

from covertlab.errors import BracketError, DomainError, QuadratureError, QuadratureWarning
from covertlab.numerics import (
    POSITIVE_HALF_LINE,
    REAL_LINE,
    Interval,
    derived_seed,
    digamma,
    find_root,
    integrate,
    integrate_fourier,
    log_gamma,
    make_rng,
    trigamma,
)

EULER_GAMMA = 0.5772156649015329


def test_interval_rejects_empty_range():
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)
    with pytest.raises(DomainError):
        Interval(2.0, 1.0)


def test_integrate_exponential_density_on_half_line():
    res = integrate(lambda z: math.exp(-z), POSITIVE_HALF_LINE)
    assert res.converged
    assert abs(res.value - 1.0) <= 1e-10


def test_integrate_gaussian_density_on_real_line():
    res = integrate(lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi), REAL_LINE, points=(0.0,))
    assert res.converged
    assert abs(res.value - 1.0) <= 1e-10


def test_integrate_log_singularity_matches_euler_constant():
    res = integrate(lambda z: math.exp(-z) * math.log(z), POSITIVE_HALF_LINE, 1e-12, 1e-10, points=(1.0,))
    assert res.require() == pytest.approx(-EULER_GAMMA, abs=1e-8)


def test_integrate_nan_integrand_raises_with_abscissa():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda z: math.nan, Interval(0.0, 1.0))
    assert info.value.abscissa is not None


def test_integrate_divergent_integral_reports_partial_value():
    with pytest.warns(QuadratureWarning):
        res = integrate(lambda z: 1.0 / z, Interval(0.0, 1.0))
    assert not res.converged
    with pytest.raises(QuadratureError):
        res.require("divergent")


def test_integrate_rejects_non_positive_tolerance():
    with pytest.raises(DomainError):
        integrate(lambda z: 1.0, Interval(0.0, 1.0), abs_tol=0.0)


def test_integrate_fourier_matches_exponential_charfn():
    # E[cos tZ] and E[sin tZ] for Z ~ Exp(1): 1/(1+t^2) and t/(1+t^2)
    t = 1.5
    re = integrate_fourier(lambda z: math.exp(-z), t, "cos", POSITIVE_HALF_LINE).require()
    im = integrate_fourier(lambda z: math.exp(-z), t, "sin", POSITIVE_HALF_LINE).require()
    assert re == pytest.approx(1.0 / (1.0 + t * t), abs=1e-9)
    assert im == pytest.approx(t / (1.0 + t * t), abs=1e-9)


def test_integrate_fourier_real_line_gaussian():
    dens = lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)  # noqa: E731
    re = integrate_fourier(dens, 2.0, "cos", REAL_LINE).require()
    im = integrate_fourier(dens, 2.0, "sin", REAL_LINE).require()
    assert re == pytest.approx(math.exp(-2.0), abs=1e-9)
    assert abs(im) <= 1e-9


def test_integrate_fourier_rejects_unknown_part():
    with pytest.raises(DomainError):
        integrate_fourier(lambda z: 1.0, 1.0, "tan", Interval(0.0, 1.0))


def test_find_root_sqrt_two():
    root = find_root(lambda x: x * x - 2.0, (1.0, 2.0))
    assert abs(root - math.sqrt(2.0)) <= 1e-12


def test_find_root_at_zero():
    assert abs(find_root(lambda x: x, (-1.0, 1.0))) <= 1e-12


def test_find_root_exponential_divergence_equation():
    target = 1e-4

    def f(g):
        return math.log1p(-g) + g / (1.0 - g) - target

    root = find_root(f, (0.0, 0.5))
    assert root == pytest.approx(0.0141, abs=2e-4)
    assert abs(f(root)) <= 1e-11 * target


def test_find_root_is_stable_when_rerun_near_root():
    f = lambda x: math.cos(x) - x  # noqa: E731
    root = find_root(f, (0.0, 1.0))
    again = find_root(f, (root - 1e-3, root + 1e-3))
    assert abs(again - root) <= 1e-12


def test_find_root_without_sign_change_raises():
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1.0, (-1.0, 1.0))


def test_special_function_values():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-14)
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-14)
    assert trigamma(1.0) == pytest.approx(math.pi**2 / 6.0, abs=1e-13)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_special_functions_reject_non_positive(bad):
    for fn in (log_gamma, digamma, trigamma):
        with pytest.raises(DomainError):
            fn(bad)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 10.0])
def test_digamma_is_derivative_of_log_gamma(x):
    h = 1e-5
    fd = (log_gamma(x + h) - log_gamma(x - h)) / (2.0 * h)
    assert fd == pytest.approx(digamma(x), abs=1e-6)


@pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
def test_trigamma_is_derivative_of_digamma(x):
    h = 1e-5
    fd = (digamma(x + h) - digamma(x - h)) / (2.0 * h)
    assert fd == pytest.approx(trigamma(x), abs=1e-6)


def test_special_functions_accept_arrays():
    out = digamma(np.array([1.0, 2.0]))
    assert out.shape == (2,)
    assert out[1] - out[0] == pytest.approx(1.0, abs=1e-14)


def test_make_rng_is_deterministic():
    a = make_rng(42).random(1000)
    b = make_rng(42).random(1000)
    c = make_rng(43).random(1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_make_rng_uniform_mean():
    u = make_rng(7).random(1_000_000)
    assert abs(float(u.mean()) - 0.5) <= 0.002


def test_derived_seed_wraps_to_64_bits():
    assert derived_seed(5, 3) == 8
    assert derived_seed(2**64 - 1, 1) == 0

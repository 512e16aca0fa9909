import math
import warnings

import numpy as np
import pytest

from covertlab import noise_models as nm
from covertlab.errors import DegenerateNoiseWarning, DomainError
from covertlab.numerics import make_rng
from covertlab.scaling import (
    BASIS_DEGENERATE,
    BASIS_EXPONENTIAL,
    BASIS_GAUSSIAN,
    BASIS_GG_P_LE_1,
    BASIS_UPPER_ONLY,
    assemble_ggamma_second_moment,
    gg_scaling_upper,
    ggamma_moments,
    ggamma_scaling_upper,
    scaling_constant,
)

MOMENT_TRIPLES = [(1.0, 1.0, 1.0), (2.0, 1.0, 1.0), (3.0, 2.0, 1.5)]


@pytest.mark.parametrize("lam", [0.5, 1.0, 7.0])
def test_exponential_constant_is_root_two(lam):
    res = scaling_constant(nm.exponential(lam))
    assert res.L_exact == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert res.L_upper == res.L_exact
    assert res.exactness_basis == BASIS_EXPONENTIAL


@pytest.mark.parametrize("model", [nm.exponential(1.0), nm.gaussian(1.0)], ids=str)
def test_quadrature_path_matches_closed_form(model):
    closed = scaling_constant(model).L_upper
    assert scaling_constant(model, method="quadrature").L_upper == pytest.approx(closed, abs=1e-6)


def test_gaussian_constant_is_one():
    res = scaling_constant(nm.gaussian(3.0))
    assert res.L_exact == pytest.approx(1.0, abs=1e-12)
    assert res.exactness_basis == BASIS_GAUSSIAN


@pytest.mark.parametrize("p", [0.5, 1.0, 4.0])
def test_generalized_gaussian_constant(p):
    model = nm.generalized_gaussian(p, 1.0)
    res = scaling_constant(model)
    assert res.L_upper == pytest.approx(math.sqrt(2.0 / p), abs=1e-12)
    assert math.sqrt(2.0 * nm.log_pdf_variance_quadrature(model)) == pytest.approx(res.L_upper, abs=1e-6)


def test_generalized_gaussian_exactness_basis():
    assert scaling_constant(nm.generalized_gaussian(0.5, 1.0)).exactness_basis == BASIS_GG_P_LE_1
    assert scaling_constant(nm.generalized_gaussian(1.0, 1.0)).exactness_basis == BASIS_GG_P_LE_1
    assert scaling_constant(nm.generalized_gaussian(2.0, 1.0)).exactness_basis == BASIS_GAUSSIAN
    res = scaling_constant(nm.generalized_gaussian(4.0, 1.0))
    assert res.exactness_basis == BASIS_UPPER_ONLY
    assert res.L_exact is None
    assert scaling_constant(nm.laplace(2.0)).exactness_basis == BASIS_GG_P_LE_1


def test_uniform_constant_is_degenerate_zero():
    res = scaling_constant(nm.uniform(-1.0, 1.0))
    assert res.L_upper == 0.0
    assert res.exactness_basis == BASIS_DEGENERATE


def test_gg_scaling_upper_values():
    assert gg_scaling_upper(2.0) == pytest.approx(1.0, abs=1e-15)
    assert gg_scaling_upper(1.0) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert gg_scaling_upper(8.0) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(DomainError):
        gg_scaling_upper(0.0)
    with pytest.raises(DomainError):
        gg_scaling_upper(-1.0)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 3.0])
def test_ggamma_on_unit_shape_curve(beta):
    # r = 1/beta makes (r - 1/beta)^2 vanish
    assert ggamma_scaling_upper(1.0 / beta, beta) == pytest.approx(math.sqrt(2.0 / beta), abs=1e-9)


def test_ggamma_reference_values():
    assert ggamma_scaling_upper(1.0, 1.0) == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert ggamma_scaling_upper(2.0, 1.0) == pytest.approx(math.sqrt(2.0 * (math.pi**2 / 6.0 - 1.0)), abs=1e-12)


def test_ggamma_rejects_non_positive_shape():
    with pytest.raises(DomainError):
        ggamma_scaling_upper(0.0, 1.0)
    with pytest.raises(DomainError):
        ggamma_scaling_upper(1.0, -2.0)


@pytest.mark.parametrize("r", [1.0, 2.0, 3.0])
@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_ggamma_closed_form_matches_quadrature(r, beta):
    model = nm.generalized_gamma(r, 1.0, beta)
    quad = math.sqrt(2.0 * nm.log_pdf_variance_quadrature(model))
    assert ggamma_scaling_upper(r, beta) == pytest.approx(quad, abs=1e-6)


def test_ggamma_is_reported_as_upper_bound_only():
    res = scaling_constant(nm.generalized_gamma(1.0, 1.0, 1.0))
    assert res.exactness_basis == BASIS_UPPER_ONLY
    assert res.L_exact is None
    assert res.L_upper == pytest.approx(math.sqrt(2.0), abs=1e-12)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_scaling_constant_is_scale_invariant(sigma):
    pairs = [
        (nm.gaussian(sigma), nm.gaussian(1.0)),
        (nm.exponential(1.0 / sigma), nm.exponential(1.0)),
        (nm.laplace(sigma), nm.laplace(1.0)),
        (nm.generalized_gaussian(0.5, sigma), nm.generalized_gaussian(0.5, 1.0)),
        (nm.generalized_gamma(2.0, sigma, 1.5), nm.generalized_gamma(2.0, 1.0, 1.5)),
    ]
    for scaled, unit in pairs:
        assert scaling_constant(scaled).L_upper == pytest.approx(scaling_constant(unit).L_upper, abs=1e-12)


def test_uniform_variance_warning_is_silent_in_scaling():
    with warnings.catch_warnings():
        warnings.simplefilter("error", DegenerateNoiseWarning)
        scaling_constant(nm.uniform(0.0, 1.0))


# ----------------------------
# Generalized gamma moments
# ----------------------------

@pytest.mark.parametrize("r,sigma,beta", MOMENT_TRIPLES)
def test_ggamma_moments_match_quadrature(r, sigma, beta):
    model = nm.generalized_gamma(r, sigma, beta)
    m = ggamma_moments(r, sigma, beta)

    def q(g):
        return nm.expect(model, lambda lp, z: g(z)).require()

    assert m.e_ln_z == pytest.approx(q(math.log), abs=1e-6)
    assert m.e_ln_z_sq == pytest.approx(q(lambda z: math.log(z) ** 2), abs=1e-6)
    assert m.e_zb == pytest.approx(q(lambda z: (z / sigma) ** beta), abs=1e-6)
    assert m.e_z2b == pytest.approx(q(lambda z: (z / sigma) ** (2.0 * beta)), abs=1e-6)
    assert m.e_lnz_zb == pytest.approx(q(lambda z: math.log(z) * (z / sigma) ** beta), abs=1e-6)


@pytest.mark.parametrize("r,sigma,beta", MOMENT_TRIPLES)
def test_ggamma_moments_match_monte_carlo(r, sigma, beta):
    model = nm.generalized_gamma(r, sigma, beta)
    m = ggamma_moments(r, sigma, beta)
    z = nm.sample(model, make_rng(2024), 1_000_000)
    ln_z = np.log(z)
    zb = (z / sigma) ** beta

    for closed, draws in [
        (m.e_ln_z, ln_z),
        (m.e_ln_z_sq, ln_z**2),
        (m.e_zb, zb),
        (m.e_z2b, zb**2),
        (m.e_lnz_zb, ln_z * zb),
    ]:
        se = float(np.std(draws, ddof=1)) / math.sqrt(draws.size)
        assert abs(float(np.mean(draws)) - closed) <= 4.0 * se


@pytest.mark.parametrize("r,sigma,beta", MOMENT_TRIPLES)
def test_ggamma_moments_satisfy_jensen(r, sigma, beta):
    m = ggamma_moments(r, sigma, beta)
    assert m.e_z2b >= m.e_zb**2
    assert m.e_ln_z_sq >= m.e_ln_z**2


@pytest.mark.parametrize("r,sigma,beta", MOMENT_TRIPLES)
def test_assembled_second_moment(r, sigma, beta):
    model = nm.generalized_gamma(r, sigma, beta)
    assembled = assemble_ggamma_second_moment(r, sigma, beta)
    quad = nm.expect(model, lambda lp, z: lp * lp).require()
    assert assembled == pytest.approx(quad, abs=1e-6)

    # E[(ln p)^2] = Var + (E ln p)^2
    mean = nm.log_pdf_mean(model)
    assert assembled == pytest.approx(nm.log_pdf_variance(model) + mean * mean, abs=1e-9)


def test_ggamma_moments_reject_bad_parameters():
    with pytest.raises(DomainError):
        ggamma_moments(1.0, 0.0, 1.0)

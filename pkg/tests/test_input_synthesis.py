import math

import numpy as np
import pytest

from covertlab import noise_models as nm
from covertlab.errors import DomainError, NotSynthesizableError
from covertlab.input_synthesis import (
    KIND_GAUSSIAN,
    KIND_MIXTURE,
    InputLaw,
    characteristic_function,
    charfn_factorization_residual,
    input_law_charfn,
    ks_check,
    sample_input,
    synthesize_input,
    tail_probability,
)
from covertlab.numerics import make_rng


def test_gaussian_input_variance():
    law = synthesize_input(nm.gaussian(1.0), 0.1)
    assert law.kind == KIND_GAUSSIAN
    assert law.variance == pytest.approx(1.0 / 9.0, abs=1e-15)

    law = synthesize_input(nm.gaussian(2.0), 0.2)
    assert law.variance == pytest.approx(4.0 * 0.2 / 0.8, abs=1e-15)


def test_exponential_input_mixture():
    law = synthesize_input(nm.exponential(2.0), 0.25)
    assert law.kind == KIND_MIXTURE
    assert law.mass_at_zero == pytest.approx(0.75, abs=1e-15)
    assert law.rate == pytest.approx(1.5, abs=1e-15)


def test_zero_tilt_is_silent_input():
    assert synthesize_input(nm.gaussian(1.0), 0.0).variance == 0.0
    assert synthesize_input(nm.exponential(1.0), 0.0).mass_at_zero == 1.0


def test_other_families_are_not_synthesizable():
    for model in (nm.laplace(1.0), nm.generalized_gaussian(1.5, 1.0), nm.uniform(0.0, 1.0)):
        with pytest.raises(NotSynthesizableError):
            synthesize_input(model, 0.1)


@pytest.mark.parametrize("gamma", [-0.1, 1.0])
def test_synthesize_rejects_gamma_out_of_range(gamma):
    with pytest.raises(DomainError):
        synthesize_input(nm.gaussian(1.0), gamma)


def test_mixture_sampler_point_mass_fraction():
    law = InputLaw(kind=KIND_MIXTURE, gamma=0.1, mass_at_zero=0.9, rate=1.0)
    x = sample_input(law, make_rng(5), 1_000_000)
    assert abs(float(np.mean(x == 0.0)) - 0.9) <= 0.001
    assert np.all(x >= 0.0)


def test_gaussian_sampler_variance():
    law = InputLaw(kind=KIND_GAUSSIAN, gamma=0.04 / 1.04, variance=0.04)
    x = sample_input(law, make_rng(6), 1_000_000)
    assert abs(float(np.var(x)) - 0.04) <= 0.0005


def test_sample_input_empty_and_negative_count():
    law = synthesize_input(nm.gaussian(1.0), 0.1)
    assert sample_input(law, make_rng(0), 0).shape == (0,)
    with pytest.raises(DomainError):
        sample_input(law, make_rng(0), -3)


def test_charfn_residual_gaussian():
    law = synthesize_input(nm.gaussian(1.0), 0.1)
    assert charfn_factorization_residual(nm.gaussian(1.0), law, 0.1) <= 1e-10


def test_charfn_residual_exponential():
    law = synthesize_input(nm.exponential(1.0), 0.2)
    assert charfn_factorization_residual(nm.exponential(1.0), law, 0.2) <= 1e-8


@pytest.mark.parametrize("model", [nm.gaussian(1.5), nm.exponential(0.7)], ids=str)
@pytest.mark.parametrize("gamma", [0.05, 0.2])
def test_charfn_factorises_on_grid(model, gamma):
    law = synthesize_input(model, gamma)
    assert charfn_factorization_residual(model, law, gamma) <= 1e-8


@pytest.mark.parametrize("model", [nm.gaussian(1.0), nm.exponential(1.0)], ids=str)
def test_charfn_residual_at_zero_tilt(model):
    law = synthesize_input(model, 0.0)
    assert charfn_factorization_residual(model, law, 0.0) == 0.0


def test_wrong_input_law_leaves_a_residual():
    wrong = InputLaw(kind=KIND_GAUSSIAN, gamma=0.1, variance=0.5)
    assert charfn_factorization_residual(nm.gaussian(1.0), wrong, 0.1) > 1e-3


@pytest.mark.parametrize("model", [nm.exponential(1.0), nm.laplace(1.0), nm.uniform(-1.0, 2.0)], ids=str)
def test_charfn_closed_matches_quadrature(model):
    t = np.array([0.0, 0.5, 2.0])
    closed = characteristic_function(model, t)
    quad = characteristic_function(model, t, method="quadrature")
    assert np.max(np.abs(closed - quad)) <= 1e-7


def test_charfn_quadrature_for_generalized_gaussian():
    # GG with p = 2 is Gaussian, so the quadrature path has a closed-form reference
    t = np.array([0.3, 1.0])
    phi = characteristic_function(nm.generalized_gaussian(2.0, 1.0), t)
    assert np.allclose(phi, np.exp(-0.5 * t * t), atol=1e-8)


def test_charfn_scalar_input():
    phi = characteristic_function(nm.exponential(2.0), 1.0)
    assert isinstance(phi, complex)
    assert phi == pytest.approx(2.0 / (2.0 - 1j), abs=1e-15)
    assert input_law_charfn(synthesize_input(nm.exponential(1.0), 0.0), 3.0) == pytest.approx(1.0 + 0j)


@pytest.mark.parametrize("model", [nm.gaussian(1.0), nm.exponential(1.0)], ids=str)
@pytest.mark.parametrize("gamma", [0.05, 0.2])
def test_output_draws_follow_tilted_law(model, gamma):
    law = synthesize_input(model, gamma)
    res = ks_check(model, law, gamma, 1_000_000, make_rng(17))
    assert res.passed
    assert res.samples == 1_000_000


@pytest.mark.parametrize("model", [nm.gaussian(1.0), nm.exponential(1.0)], ids=str)
def test_input_law_concentrates_at_zero_as_tilt_vanishes(model):
    tails = [tail_probability(synthesize_input(model, g), 0.1) for g in (0.2, 0.1, 0.05, 0.01)]
    assert all(b < a for a, b in zip(tails, tails[1:]))
    assert tail_probability(synthesize_input(model, 0.0), 0.1) == 0.0


def test_tail_probability_values():
    mix = synthesize_input(nm.exponential(1.0), 0.2)
    assert tail_probability(mix, 1.0) == pytest.approx(0.2 * math.exp(-0.8), abs=1e-15)
    gauss = InputLaw(kind=KIND_GAUSSIAN, gamma=0.5, variance=1.0)
    assert tail_probability(gauss, 1.96) == pytest.approx(0.05, abs=1e-3)

import math

import numpy as np
import pytest

from covertlab import noise_models as nm
from covertlab.errors import CodebookSizeError, DomainError, NotSynthesizableError
from covertlab.input_synthesis import sample_input, synthesize_input
from covertlab.numerics import make_rng
from covertlab.simulator import (
    SWEEP_COLUMNS,
    CodebookSpec,
    generate_codebook,
    information_density,
    run_experiment,
    sweep,
    threshold_decode,
    transmit,
    wilson_interval,
)
from covertlab.tilt import entropy_gap, make_tilted


def _zero_noise(model, rng, count):
    return np.zeros(count)


# ----------------------------
# Codebook
# ----------------------------

@pytest.mark.parametrize("field", ["n", "num_messages", "num_keys"])
def test_codebook_spec_rejects_empty_dimensions(field):
    kwargs = dict(n=4, num_messages=2, num_keys=1, seed=0)
    kwargs[field] = 0
    with pytest.raises(DomainError):
        CodebookSpec(**kwargs)


def test_codebook_shape_and_reproducibility():
    law = synthesize_input(nm.exponential(1.0), 0.2)
    spec = CodebookSpec(n=4, num_messages=2, num_keys=3, seed=7)
    a = generate_codebook(spec, law)
    b = generate_codebook(spec, law)
    assert a.codewords.shape == (3, 2, 4)
    assert np.array_equal(a.codewords, b.codewords)
    assert np.all(a.codewords >= 0.0)
    assert a.codeword(1, 2).shape == (4,)
    assert not a.codewords.flags.writeable


def test_silent_input_gives_all_zero_codebook():
    law = synthesize_input(nm.exponential(1.0), 0.0)
    book = generate_codebook(CodebookSpec(n=16, num_messages=4, num_keys=2, seed=1), law)
    assert np.all(book.codewords == 0.0)


def test_codebook_budget(monkeypatch):
    monkeypatch.setenv("COVERTLAB_MAX_CODEBOOK_ENTRIES", "10")
    law = synthesize_input(nm.gaussian(1.0), 0.1)
    with pytest.raises(CodebookSizeError):
        generate_codebook(CodebookSpec(n=4, num_messages=2, num_keys=3, seed=0), law)


def test_key_slice_range():
    law = synthesize_input(nm.gaussian(1.0), 0.1)
    book = generate_codebook(CodebookSpec(n=4, num_messages=2, num_keys=2, seed=0), law)
    with pytest.raises(DomainError):
        book.key_slice(2)


# ----------------------------
# Channel and information density
# ----------------------------

def test_transmit_with_zero_noise_returns_codeword():
    x = np.array([0.0, 1.5, 2.0])
    assert np.array_equal(transmit(x, nm.exponential(1.0), make_rng(0), noise=_zero_noise), x)


def test_transmit_adds_noise_with_the_right_mean():
    y = transmit(np.zeros(100_000), nm.exponential(1.0), make_rng(3))
    assert abs(float(np.mean(y)) - 1.0) <= 0.015


def test_information_density_vanishes_without_tilt():
    model = nm.gaussian(1.0)
    tilted = make_tilted(model, 0.0)
    assert information_density([0.0], [1.7], model, tilted) == 0.0


def test_information_density_single_letter():
    model = nm.exponential(1.0)
    tilted = make_tilted(model, 0.1)
    i = information_density([0.0], [2.0], model, tilted)
    assert i == pytest.approx(-2.0 - (math.log(0.9) - 0.9 * 2.0), abs=1e-12)
    assert i == pytest.approx(-0.0946395, abs=1e-6)


def test_information_density_off_support():
    model = nm.exponential(1.0)
    tilted = make_tilted(model, 0.1)
    assert information_density([3.0], [2.0], model, tilted) == -math.inf


def test_information_density_shape_mismatch():
    model = nm.gaussian(1.0)
    with pytest.raises(DomainError):
        information_density([0.0, 1.0], [0.0], model, make_tilted(model, 0.1))


def test_information_density_mean_is_entropy_gap():
    # per-letter Var(i) = 2 gamma for exponential noise with the mixture input
    model, gamma, n = nm.exponential(1.0), 0.1, 100_000
    rng = make_rng(21)
    law = synthesize_input(model, gamma)
    tilted = make_tilted(model, gamma)
    x = sample_input(law, rng, n)
    y = transmit(x, model, rng)
    total = information_density(x, y, model, tilted)
    se = math.sqrt(n * 2.0 * gamma)
    assert abs(total - n * entropy_gap(tilted)) <= 4.0 * se


# ----------------------------
# Decoder
# ----------------------------

def _gaussian_book(seed=4):
    model = nm.gaussian(1.0)
    law = synthesize_input(model, 0.2)
    book = generate_codebook(CodebookSpec(n=64, num_messages=3, num_keys=2, seed=seed), law)
    return model, make_tilted(model, 0.2), book


def test_threshold_decode_noiseless_recovers_message():
    model, tilted, book = _gaussian_book()
    y = transmit(book.codeword(1, 1), model, make_rng(0), noise=_zero_noise)
    threshold = information_density(book.codeword(1, 1), y, model, tilted) - 1e-6
    assert threshold_decode(y, book, 1, threshold, model, tilted).message == 1


def test_threshold_decode_erases_above_every_density():
    model, tilted, book = _gaussian_book()
    y = book.codeword(0, 0)
    out = threshold_decode(y, book, 0, math.inf, model, tilted)
    assert out.erased
    assert out.message is None


def test_threshold_decode_picks_lowest_index():
    model, tilted, book = _gaussian_book()
    y = book.codeword(2, 0)
    assert threshold_decode(y, book, 0, -math.inf, model, tilted).message == 0


# ----------------------------
# Experiments
# ----------------------------

def test_wilson_interval_bounds():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0 and 0.0 < hi < 1.0
    lo, hi = wilson_interval(10, 10)
    assert hi == pytest.approx(1.0) and 0.0 < lo < 1.0
    lo, hi = wilson_interval(30, 100)
    assert lo < 0.3 < hi


def test_error_rate_is_below_union_of_failure_events():
    rep = run_experiment(nm.exponential(1.0), 1.0, 1024, 0.7, trials=1000, seed=3)
    assert rep.error_rate <= rep.missed_detection_rate + rep.false_alarm_rate + 1e-12
    assert rep.error_rate <= rep.feinstein_bound + rep.false_alarm_rate + 1e-12
    assert rep.ci_lo <= rep.error_rate <= rep.ci_hi
    assert rep.covert_divergence < 1.0
    assert rep.tau == pytest.approx(1024**0.25)
    assert rep.threshold == pytest.approx(rep.msg_nats_target + rep.tau)


def test_single_message_rarely_fails():
    rep = run_experiment(nm.exponential(1.0), 1.0, 4096, 0.0, trials=300, seed=11)
    assert rep.num_messages == 1
    assert rep.error_rate <= math.exp(-rep.tau)


def test_experiment_is_reproducible_and_worker_independent():
    args = (nm.gaussian(1.0), 1.0, 256, 0.7)
    a = run_experiment(*args, trials=120, seed=9, workers=1)
    b = run_experiment(*args, trials=120, seed=9, workers=1)
    c = run_experiment(*args, trials=120, seed=9, workers=3)
    assert a == b
    assert a == c


def test_experiment_rejects_bad_arguments():
    with pytest.raises(DomainError):
        run_experiment(nm.exponential(1.0), 1.0, 256, 1.0, trials=10)
    with pytest.raises(DomainError):
        run_experiment(nm.exponential(1.0), 1.0, 256, 0.5, trials=0)
    with pytest.raises(NotSynthesizableError):
        run_experiment(nm.laplace(1.0), 1.0, 256, 0.5, trials=10)


def test_sweep_frame_is_deterministic():
    a = sweep(nm.exponential(1.0), 1.0, [64, 128], 0.7, trials=40, seed=5)
    b = sweep(nm.exponential(1.0), 1.0, [64, 128], 0.7, trials=40, seed=5)
    assert list(a.columns) == SWEEP_COLUMNS
    assert list(a["n"]) == [64, 128]
    csv = dict(index=False, float_format="%.12g", lineterminator="\n")
    assert a.to_csv(**csv) == b.to_csv(**csv)


@pytest.mark.slow
@pytest.mark.parametrize("model", [nm.exponential(1.0), nm.gaussian(1.0)], ids=str)
def test_monte_carlo_trends_across_blocklengths(model):
    reports = [run_experiment(model, 1.0, n, 0.7, trials=2000, seed=0) for n in (256, 1024, 4096)]

    for rep in reports:
        expected = rep.analytic_mutual_info / math.sqrt(rep.n)
        assert abs(rep.normalized_mean - expected) <= 4.0 * rep.normalized_mean_se
        assert rep.covert_divergence < rep.delta_budget

    variances = [rep.normalized_var for rep in reports]
    assert all(b < a for a, b in zip(variances, variances[1:]))
    errors = [rep.error_rate for rep in reports]
    assert all(b <= a for a, b in zip(errors, errors[1:]))

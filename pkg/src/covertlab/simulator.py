"""
Monte Carlo run of the random-coding achievability scheme.

Each trial draws a codebook i.i.d. from the synthesized input law, picks a
message and key uniformly, sends the codeword through the additive-noise
channel and decodes with the information-density threshold rule
(first message in the key's slice whose density exceeds ln|M| + n^(1/4)).

The output law in the information density is the product tilted density,
not the codebook-induced mixture.

Codebooks of the target size e^(rate * sqrt(n delta)) do not fit in memory for
useful n, so the realised codebook is capped (message_cap messages per key)
while the decoding threshold stays at the target rate. The report carries both.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats as sp_stats

from . import noise_models as nm
from .errors import CodebookSizeError, DomainError
from .input_synthesis import InputLaw, sample_input, synthesize_input
from .noise_models import NoiseModel
from .numerics import RandomStream, derived_seed, make_rng
from .scaling import scaling_constant
from .settings import (
    CI_CONFIDENCE_LEVEL,
    DEFAULT_CHI,
    DEFAULT_MESSAGE_CAP,
    DEFAULT_NUM_KEYS,
    DEFAULT_RATE_FRACTION,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    max_codebook_entries,
    max_workers,
)
from .tilt import TiltedNoise, entropy_gap, gamma_achievability, kl_tilted_to_base, make_tilted

logger = logging.getLogger(__name__)

NoiseSource = Callable[[NoiseModel, RandomStream, int], np.ndarray]

SWEEP_COLUMNS = [
    "n",
    "gamma",
    "rate",
    "error_rate",
    "ci_lo",
    "ci_hi",
    "idensity_mean",
    "idensity_var",
    "covert_div",
]


@dataclass(frozen=True)
class CodebookSpec:
    n: int
    num_messages: int
    num_keys: int
    seed: int

    def __post_init__(self) -> None:
        for name in ("n", "num_messages", "num_keys"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"CodebookSpec.{name} must be an integer >= 1, got {value!r}.")

    @property
    def total_entries(self) -> int:
        return self.n * self.num_messages * self.num_keys


@dataclass(frozen=True)
class Codebook:
    spec: CodebookSpec
    codewords: np.ndarray  # (num_keys, num_messages, n), read-only

    def codeword(self, message: int, key: int) -> np.ndarray:
        return self.codewords[key, message]

    def key_slice(self, key: int) -> np.ndarray:
        if not 0 <= key < self.spec.num_keys:
            raise DomainError(f"key must lie in [0, {self.spec.num_keys}), got {key}.")
        return self.codewords[key]


@dataclass(frozen=True)
class DecodeOutcome:
    message: Optional[int]  # None on erasure

    @property
    def erased(self) -> bool:
        return self.message is None


@dataclass(frozen=True)
class TrialOutcome:
    error: bool
    erased: bool
    missed_detection: bool
    false_alarm: bool
    info_density: float


@dataclass(frozen=True)
class SimulationReport:
    model: str
    n: int
    delta_budget: float
    rate_fraction: float
    gamma: float
    seed: int
    trials: int
    msg_nats_target: float
    num_messages: int
    num_keys: int
    tau: float
    threshold: float
    error_rate: float
    ci_lo: float
    ci_hi: float
    erasure_rate: float
    missed_detection_rate: float
    false_alarm_rate: float
    feinstein_bound: float
    info_density_mean: float
    info_density_var: float
    normalized_mean: float     # mean of i / sqrt(n)
    normalized_mean_se: float
    normalized_var: float      # Var(i / sqrt(n))
    analytic_mutual_info: float  # n I(X;Y) = n (h(Z~) - h(Z))
    covert_divergence: float     # n D(P_Z~ || P_Z)


# ----------------------------
# Codebook, channel, decoder
# ----------------------------

def draw_codebook(spec: CodebookSpec, law: InputLaw, rng: RandomStream) -> Codebook:
    budget = max_codebook_entries()
    if spec.total_entries > budget:
        raise CodebookSizeError(
            f"Codebook needs {spec.total_entries} entries, above the budget of {budget} "
            "(COVERTLAB_MAX_CODEBOOK_ENTRIES)."
        )
    words = sample_input(law, rng, spec.total_entries).reshape(spec.num_keys, spec.num_messages, spec.n)
    words.flags.writeable = False
    return Codebook(spec=spec, codewords=words)


def generate_codebook(spec: CodebookSpec, law: InputLaw) -> Codebook:
    """|M| * |K| codewords of length n, deterministic in spec.seed."""
    return draw_codebook(spec, law, make_rng(spec.seed))


def transmit(
    codeword: np.ndarray,
    model: NoiseModel,
    rng: RandomStream,
    noise: Optional[NoiseSource] = None,
) -> np.ndarray:
    """y = x + z with z i.i.d. from model (or from the injected noise source)."""
    x = np.asarray(codeword, dtype=float)
    draw = noise or nm.sample
    return x + np.asarray(draw(model, rng, x.shape[-1]), dtype=float)


def _densities(words: np.ndarray, y: np.ndarray, model: NoiseModel, tilted: TiltedNoise) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        channel = np.sum(nm.log_pdf(model, y[None, :] - words), axis=1)
        output = float(np.sum(nm.log_pdf(tilted.law, y)))
        return np.where(np.isneginf(channel), -np.inf, channel - output)


def information_density(x, y, model: NoiseModel, tilted: TiltedNoise) -> float:
    """sum_i ln p_Z(y_i - x_i) - ln p~(y_i); -inf when y - x leaves the noise support."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise DomainError(f"x and y must be vectors of equal length, got {xa.shape} and {ya.shape}.")
    return float(_densities(xa[None, :], ya, model, tilted)[0])


def threshold_decode(
    y,
    codebook: Codebook,
    key: int,
    threshold: float,
    model: NoiseModel,
    tilted: TiltedNoise,
) -> DecodeOutcome:
    """Lowest-index message in the key's slice whose density exceeds threshold; erasure if none."""
    dens = _densities(codebook.key_slice(key), np.asarray(y, dtype=float), model, tilted)
    hits = np.flatnonzero(dens > threshold)
    return DecodeOutcome(message=int(hits[0]) if hits.size else None)


# ----------------------------
# Experiment
# ----------------------------

def wilson_interval(errors: int, trials: int) -> Tuple[float, float]:
    ci = sp_stats.binomtest(int(errors), int(trials)).proportion_ci(
        confidence_level=CI_CONFIDENCE_LEVEL, method="wilson"
    )
    return float(ci.low), float(ci.high)


def _message_count(msg_nats: float, cap: int) -> int:
    if msg_nats >= math.log(cap):
        return cap
    return max(1, int(math.floor(math.exp(msg_nats))))


def run_experiment(
    model: NoiseModel,
    delta: float,
    n: int,
    rate_fraction: float = DEFAULT_RATE_FRACTION,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    *,
    chi: float = DEFAULT_CHI,
    message_cap: int = DEFAULT_MESSAGE_CAP,
    num_keys: int = DEFAULT_NUM_KEYS,
    workers: Optional[int] = None,
    noise: Optional[NoiseSource] = None,
) -> SimulationReport:
    if not 0.0 <= rate_fraction < 1.0:
        raise DomainError(f"rate_fraction must lie in [0, 1), got {rate_fraction!r}.")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}.")
    if message_cap < 1 or num_keys < 1:
        raise DomainError("message_cap and num_keys must be >= 1.")

    gamma = gamma_achievability(model, delta, n, chi)
    law = synthesize_input(model, gamma)
    tilted = make_tilted(model, gamma)

    L = scaling_constant(model).L_upper
    msg_nats = rate_fraction * L * math.sqrt(n * delta)
    tau = float(n) ** 0.25
    threshold = msg_nats + tau
    num_messages = _message_count(msg_nats, message_cap)
    CodebookSpec(n=n, num_messages=num_messages, num_keys=num_keys, seed=seed)  # validates counts

    logger.info(
        "Simulating %s: n=%d delta=%g gamma=%.6g |M|target=e^%.4g realised=%dx%d trials=%d",
        model, n, delta, gamma, msg_nats, num_messages, num_keys, trials,
    )

    def run_trial(index: int) -> TrialOutcome:
        trial_seed = derived_seed(seed, 1 + index)
        rng = make_rng(trial_seed)
        spec = CodebookSpec(n=n, num_messages=num_messages, num_keys=num_keys, seed=trial_seed)
        book = draw_codebook(spec, law, rng)
        message = int(rng.integers(num_messages))
        key = int(rng.integers(num_keys))

        y = transmit(book.codeword(message, key), model, rng, noise)
        dens = _densities(book.key_slice(key), y, model, tilted)
        hits = dens > threshold
        first = int(np.argmax(hits)) if hits.any() else None
        others = np.delete(hits, message)

        outcome = TrialOutcome(
            error=first != message,
            erased=first is None,
            missed_detection=not bool(hits[message]),
            false_alarm=bool(others.any()),
            info_density=float(dens[message]),
        )
        logger.debug("trial %d: m=%d k=%d i=%.6g decoded=%s", index, message, key, outcome.info_density, first)
        return outcome

    pool_size = workers if workers is not None else max_workers()
    if pool_size > 1:
        with ThreadPoolExecutor(max_workers=pool_size) as pool:
            outcomes: List[TrialOutcome] = list(pool.map(run_trial, range(trials)))
    else:
        outcomes = [run_trial(i) for i in range(trials)]

    errors = sum(o.error for o in outcomes)
    densities = np.array([o.info_density for o in outcomes], dtype=float)
    ci_lo, ci_hi = wilson_interval(errors, trials)
    missed = sum(o.missed_detection for o in outcomes) / trials

    root_n = math.sqrt(n)
    var_i = float(np.var(densities, ddof=1)) if trials > 1 else 0.0
    report = SimulationReport(
        model=str(model),
        n=int(n),
        delta_budget=float(delta),
        rate_fraction=float(rate_fraction),
        gamma=gamma,
        seed=int(seed),
        trials=int(trials),
        msg_nats_target=msg_nats,
        num_messages=num_messages,
        num_keys=num_keys,
        tau=tau,
        threshold=threshold,
        error_rate=errors / trials,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        erasure_rate=sum(o.erased for o in outcomes) / trials,
        missed_detection_rate=missed,
        false_alarm_rate=sum(o.false_alarm for o in outcomes) / trials,
        feinstein_bound=missed + math.exp(-tau),
        info_density_mean=float(np.mean(densities)),
        info_density_var=var_i,
        normalized_mean=float(np.mean(densities)) / root_n,
        normalized_mean_se=math.sqrt(var_i / n / trials),
        normalized_var=var_i / n,
        analytic_mutual_info=n * entropy_gap(tilted),
        covert_divergence=n * kl_tilted_to_base(tilted),
    )
    logger.info(
        "n=%d error_rate=%.4f [%.4f, %.4f] n*D=%.6g", n, report.error_rate, ci_lo, ci_hi, report.covert_divergence
    )
    return report


def sweep_row(report: SimulationReport) -> dict:
    return {
        "n": report.n,
        "gamma": report.gamma,
        "rate": report.msg_nats_target / report.n,
        "error_rate": report.error_rate,
        "ci_lo": report.ci_lo,
        "ci_hi": report.ci_hi,
        "idensity_mean": report.normalized_mean,
        "idensity_var": report.normalized_var,
        "covert_div": report.covert_divergence,
    }


def sweep(
    model: NoiseModel,
    delta: float,
    n_values: Iterable[int],
    rate_fraction: float = DEFAULT_RATE_FRACTION,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    **kwargs,
) -> pd.DataFrame:
    """One experiment per n; columns in SWEEP_COLUMNS order."""
    rows = [
        sweep_row(run_experiment(model, delta, int(n), rate_fraction, trials, seed, **kwargs))
        for n in n_values
    ]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)

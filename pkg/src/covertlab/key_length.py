"""
Key length for the resolvability (output-statistics) side of the scheme.

Psi(rho) = ln E[(p_{Y|X}(Y|X) / p_Y(Y))^rho] under the synthesized input law,
the resolvability bound (1/rho) ln(1 + exp(-rho (ln|K| + ln|M|) + n Psi)), and
the smallest ln|K| that pushes the bound below a target leak.

All quantities are in nats.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats as sp_stats

from . import noise_models as nm
from .errors import DivergenceError, DomainError
from .input_synthesis import KIND_GAUSSIAN, sample_input, synthesize_input
from .noise_models import NoiseModel
from .numerics import Interval, RandomStream, integrate
from .scaling import scaling_constant
from .settings import DEFAULT_CHI, DEFAULT_XI_EXPONENT, PSI_OUTER_TAIL, RHO_GRID_MAX, RHO_GRID_POINTS
from .tilt import gamma_achievability, make_tilted

logger = logging.getLogger(__name__)

SCHEDULE_SUB_SQRT = "SubSqrt"
SCHEDULE_GENERAL = "GeneralOn"

SCHEDULE_COLUMNS = ["n", "rho", "key_nats", "bound"]


@dataclass(frozen=True)
class KeyLengthReport:
    model: str
    schedule: str
    n: int
    gamma: float
    rho: float
    psi_value: float
    msg_nats: float
    key_nats: float
    resolvability_bound: float
    target_leak: float
    feasible: bool


@dataclass(frozen=True)
class PsiEstimate:
    value: float
    standard_error: float
    samples: int


def _check_rho(rho: float) -> None:
    if not (math.isfinite(rho) and 0.0 < rho <= 1.0):
        raise DomainError(f"rho must lie in (0, 1], got {rho!r}.")


# ----------------------------
# Psi
# ----------------------------

def _psi_closed(model: NoiseModel, gamma: float, rho: float) -> float:
    if model.family == nm.FAMILY_GAUSSIAN:
        if rho * rho * gamma >= 1.0:
            raise DivergenceError(f"Psi diverges for Gaussian noise when rho^2 gamma >= 1 (rho={rho}, gamma={gamma}).")
        return -0.5 * rho * math.log1p(-gamma) - 0.5 * math.log1p(-rho * rho * gamma)

    if model.family == nm.FAMILY_EXPONENTIAL:
        if rho + gamma - gamma * rho >= 1.0:
            raise DivergenceError(
                f"Psi diverges for exponential noise when rho + gamma - gamma rho >= 1 (rho={rho}, gamma={gamma})."
            )
        # E = (1-gamma)^-rho (1 + gamma rho/(1-rho)) / (1 + rho gamma)
        return -rho * math.log1p(-gamma) + math.log1p(gamma * rho / (1.0 - rho)) - math.log1p(rho * gamma)

    raise DomainError(f"Closed-form Psi is available for Gaussian and exponential noise only, not {model}.")


def _psi_quadrature(model: NoiseModel, gamma: float, rho: float) -> float:
    # same divergence conditions as the closed form
    _psi_closed(model, gamma, rho)

    law = synthesize_input(model, gamma)
    tilted = make_tilted(model, gamma)
    z_domain = nm.support(model)
    z_points = nm.break_points(model)

    def weighted_inner(x: float, log_weight: float) -> float:
        # input-law weight folded into the exponent; alone, -rho ln p~(x+z) overflows at extreme x
        def integrand(z: float) -> float:
            lp = nm.log_pdf(model, z)
            if lp == -math.inf:
                return 0.0
            return math.exp(log_weight + (1.0 + rho) * lp - rho * nm.log_pdf(tilted.law, x + z))

        return integrate(integrand, z_domain, 1e-14, 1e-11, points=z_points).require(f"inner Psi integral at x={x:g}")

    if law.kind == KIND_GAUSSIAN:
        input_dist = sp_stats.norm(scale=math.sqrt(law.variance))
        outer = integrate(
            lambda x: weighted_inner(x, float(input_dist.logpdf(x))),
            Interval(float(input_dist.ppf(PSI_OUTER_TAIL)), float(input_dist.ppf(1.0 - PSI_OUTER_TAIL))),
            1e-13, 1e-10, points=(0.0,),
        ).require("outer Psi integral")
    else:
        w = 1.0 - law.mass_at_zero
        input_dist = sp_stats.expon(scale=1.0 / law.rate)
        tail = integrate(
            lambda x: weighted_inner(x, math.log(w) + float(input_dist.logpdf(x))),
            Interval(0.0, float(input_dist.ppf(1.0 - PSI_OUTER_TAIL))),
            1e-13, 1e-10, points=(1.0 / law.rate,),
        ).require("outer Psi integral")
        outer = weighted_inner(0.0, math.log(law.mass_at_zero)) + tail

    return math.log(outer)


def _psi_bound(model: NoiseModel, gamma: float, rho: float) -> float:
    b = nm.max_density(model)
    if not math.isfinite(b):
        raise DivergenceError(f"{model} has an unbounded density; the general Psi bound does not apply.")
    law = make_tilted(model, gamma).law
    res = nm.expect(law, lambda lp, z: math.exp(-rho * lp))  # ∫ p~^(1-rho)
    if not (res.converged and math.isfinite(res.value)):
        raise DivergenceError(f"∫ p~^(1-rho) diverges for {model} at rho={rho}.")
    return rho * math.log(b) + math.log(res.value)


def psi(model: NoiseModel, gamma: float, rho: float, method: str = "closed") -> float:
    """
    method="closed": exact closed form (Gaussian, exponential).
    method="quadrature": two-dimensional quadrature of the defining expectation.
    method="bound": upper estimate ln(b^rho ∫ p~^(1-rho)) for any bounded-density model.
    """
    _check_rho(rho)
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma!r}.")

    if method == "bound":
        return _psi_bound(model, gamma, rho)
    if method not in {"closed", "quadrature"}:
        raise DomainError(f"method must be 'closed', 'quadrature' or 'bound', got {method!r}.")
    if gamma == 0.0:
        return 0.0
    if method == "quadrature":
        return _psi_quadrature(model, gamma, rho)
    return _psi_closed(model, gamma, rho)


def psi_monte_carlo(model: NoiseModel, gamma: float, rho: float, samples: int, rng: RandomStream) -> PsiEstimate:
    """ln of the sample mean of (p_Z(Y-X)/p~(Y))^rho; standard error by the delta method."""
    _check_rho(rho)
    if samples < 2:
        raise DomainError(f"samples must be >= 2, got {samples}.")
    law = synthesize_input(model, gamma)
    tilted = make_tilted(model, gamma)

    x = sample_input(law, rng, samples)
    z = nm.sample(model, rng, samples)
    ratio = np.exp(rho * (nm.log_pdf(model, z) - nm.log_pdf(tilted.law, x + z)))
    mean = float(np.mean(ratio))
    se = float(np.std(ratio, ddof=1)) / math.sqrt(samples)
    return PsiEstimate(value=math.log(mean), standard_error=se / mean, samples=int(samples))


# ----------------------------
# Resolvability bound
# ----------------------------

def resolvability_bound(psi_value: float, key_nats: float, msg_nats: float, n: int, rho: float) -> float:
    """(1/rho) ln(1 + exp(-rho (key + msg) + n psi)), evaluated in log space."""
    _check_rho(rho)
    exponent = -rho * (key_nats + msg_nats) + n * psi_value
    return float(np.logaddexp(0.0, exponent)) / rho


def _log_expm1(x: float) -> float:
    if x > 30.0:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def min_key_nats_for_rho(psi_value: float, msg_nats: float, n: int, rho: float, target_leak: float) -> float:
    """
    Smallest key_nats >= 0 with resolvability_bound <= target_leak at this rho;
    +inf when target_leak <= 0.
    """
    _check_rho(rho)
    if target_leak == math.inf:
        return 0.0
    if not target_leak > 0:
        return math.inf
    key = (n * psi_value - _log_expm1(rho * target_leak)) / rho - msg_nats
    return max(0.0, key)


def rho_grid(n: int, points: int = RHO_GRID_POINTS, rho_max: float = RHO_GRID_MAX) -> np.ndarray:
    return np.geomspace(float(n) ** -0.5, rho_max, points)


def message_nats(model: NoiseModel, delta: float, n: int, xi_exponent: float = DEFAULT_XI_EXPONENT) -> float:
    """ln|M| = L sqrt(n delta) - xi_n with xi_n = n^xi_exponent."""
    L = scaling_constant(model).L_upper
    return max(0.0, L * math.sqrt(n * delta) - float(n) ** xi_exponent)


def sufficient_key_length(
    model: NoiseModel,
    delta: float,
    n: int,
    target_leak: float,
    schedule: str = SCHEDULE_SUB_SQRT,
    *,
    chi: float = DEFAULT_CHI,
    xi_exponent: float = DEFAULT_XI_EXPONENT,
    rhos: Optional[Sequence[float]] = None,
) -> KeyLengthReport:
    """Search rho over a log grid for the smallest key_nats meeting target_leak."""
    if schedule == SCHEDULE_SUB_SQRT:
        if model.family not in {nm.FAMILY_GAUSSIAN, nm.FAMILY_EXPONENTIAL}:
            raise DomainError(f"The {SCHEDULE_SUB_SQRT} schedule covers Gaussian and exponential noise, not {model}.")
        method = "closed"
    elif schedule == SCHEDULE_GENERAL:
        if not math.isfinite(nm.max_density(model)):
            raise DivergenceError(f"The {SCHEDULE_GENERAL} schedule needs a bounded density; {model} is unbounded.")
        method = "bound"
    else:
        raise DomainError(f"schedule must be {SCHEDULE_SUB_SQRT!r} or {SCHEDULE_GENERAL!r}, got {schedule!r}.")

    gamma = gamma_achievability(model, delta, n, chi)
    msg = message_nats(model, delta, n, xi_exponent)
    grid = rho_grid(n) if rhos is None else np.asarray(rhos, dtype=float)

    best: Optional[KeyLengthReport] = None
    for rho in grid:
        rho = float(rho)
        try:
            value = psi(model, gamma, rho, method)
        except DivergenceError:
            logger.debug("rho=%.4g: Psi diverges, skipped", rho)
            continue
        key = min_key_nats_for_rho(value, msg, n, rho, target_leak)
        if not math.isfinite(key):
            continue
        if best is None or key < best.key_nats:
            best = KeyLengthReport(
                model=str(model),
                schedule=schedule,
                n=int(n),
                gamma=gamma,
                rho=rho,
                psi_value=value,
                msg_nats=msg,
                key_nats=key,
                resolvability_bound=resolvability_bound(value, key, msg, n, rho),
                target_leak=float(target_leak),
                feasible=True,
            )

    if best is None:
        logger.warning("No feasible rho for %s at n=%d, target leak %g", model, n, target_leak)
        return KeyLengthReport(
            model=str(model),
            schedule=schedule,
            n=int(n),
            gamma=gamma,
            rho=math.nan,
            psi_value=math.nan,
            msg_nats=msg,
            key_nats=math.inf,
            resolvability_bound=math.inf,
            target_leak=float(target_leak),
            feasible=False,
        )

    logger.info("%s n=%d: key_nats=%.6g at rho=%.4g (bound %.3g)", model, n, best.key_nats, best.rho, best.resolvability_bound)
    return best


def key_length_schedule(
    model: NoiseModel,
    delta: float,
    n_values: Iterable[int],
    target_leak: float,
    schedule: str = SCHEDULE_SUB_SQRT,
    **kwargs,
) -> pd.DataFrame:
    rows = []
    for n in n_values:
        rep = sufficient_key_length(model, delta, int(n), target_leak, schedule, **kwargs)
        rows.append({"n": rep.n, "rho": rep.rho, "key_nats": rep.key_nats, "bound": rep.resolvability_bound})
    return pd.DataFrame(rows, columns=SCHEDULE_COLUMNS)

"""
Input laws P_X with X + Z distributed as the tilted noise.

Closed forms exist for Gaussian noise (Gaussian input) and exponential noise
(point mass at 0 mixed with an exponential). For everything else the
characteristic-function residual |phi_Z~ - phi_Z phi_X| is available as a
falsifier for a proposed law, but no sampler is built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats as sp_stats

from . import noise_models as nm
from .errors import DomainError, NotSynthesizableError
from .noise_models import NoiseModel
from .numerics import RandomStream, integrate_fourier
from .settings import T_GRID_HALF_WIDTH, T_GRID_POINTS
from .tilt import tilted_model

KIND_GAUSSIAN = "GaussianInput"
KIND_MIXTURE = "MixturePointMassExponential"


@dataclass(frozen=True)
class InputLaw:
    kind: str
    gamma: float
    variance: Optional[float] = None      # GaussianInput
    mass_at_zero: Optional[float] = None  # MixturePointMassExponential
    rate: Optional[float] = None


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    samples: int
    passed: bool


def default_t_grid() -> np.ndarray:
    return np.linspace(-T_GRID_HALF_WIDTH, T_GRID_HALF_WIDTH, T_GRID_POINTS)


def synthesize_input(model: NoiseModel, gamma: float) -> InputLaw:
    if not (math.isfinite(gamma) and 0.0 <= gamma < 1.0):
        raise DomainError(f"gamma must lie in [0, 1), got {gamma!r}.")

    if model.family == nm.FAMILY_GAUSSIAN:
        s = model["sigma"]
        return InputLaw(kind=KIND_GAUSSIAN, gamma=gamma, variance=s * s * gamma / (1.0 - gamma))
    if model.family == nm.FAMILY_EXPONENTIAL:
        return InputLaw(
            kind=KIND_MIXTURE,
            gamma=gamma,
            mass_at_zero=1.0 - gamma,
            rate=(1.0 - gamma) * model["lambda"],
        )
    raise NotSynthesizableError(
        f"No closed-form input law for {model}; test a proposed law with charfn_factorization_residual."
    )


def sample_input(law: InputLaw, rng: RandomStream, count: int) -> np.ndarray:
    if count < 0:
        raise DomainError(f"count must be >= 0, got {count}.")
    if count == 0:
        return np.empty(0, dtype=float)

    if law.kind == KIND_GAUSSIAN:
        return rng.normal(0.0, math.sqrt(law.variance), count)
    if law.kind == KIND_MIXTURE:
        at_zero = rng.random(count) < law.mass_at_zero
        tail = rng.exponential(1.0 / law.rate, count)
        return np.where(at_zero, 0.0, tail)
    raise DomainError(f"Unknown input law kind {law.kind!r}.")


def tail_probability(law: InputLaw, a: float) -> float:
    """P(|X| > a) for a >= 0."""
    if law.kind == KIND_GAUSSIAN:
        if law.variance == 0.0:
            return 0.0
        return float(2.0 * sp_stats.norm.sf(a / math.sqrt(law.variance)))
    if law.kind == KIND_MIXTURE:
        return (1.0 - law.mass_at_zero) * math.exp(-law.rate * a)
    raise DomainError(f"Unknown input law kind {law.kind!r}.")


# ----------------------------
# Characteristic functions
# ----------------------------

def _charfn_quadrature(model: NoiseModel, t: np.ndarray) -> np.ndarray:
    dens = lambda z: nm.pdf(model, z)  # noqa: E731
    dom = nm.support(model)
    out = np.empty(t.shape, dtype=complex)
    for idx, tv in np.ndenumerate(t):
        re = integrate_fourier(dens, float(tv), "cos", dom, 1e-12, 1e-10).require(f"Re phi({tv:g})")
        im = integrate_fourier(dens, float(tv), "sin", dom, 1e-12, 1e-10).require(f"Im phi({tv:g})")
        out[idx] = complex(re, im)
    return out


def characteristic_function(model: NoiseModel, t, method: str = "closed"):
    """
    phi_Z(t) = E[exp(i t Z)]. Families without a closed form here use the
    quadrature path regardless of method.
    """
    arr = np.asarray(t, dtype=float)
    if method not in {"closed", "quadrature"}:
        raise DomainError(f"method must be 'closed' or 'quadrature', got {method!r}.")

    fam = model.family
    if method == "quadrature" or fam in {nm.FAMILY_GEN_GAUSSIAN, nm.FAMILY_GEN_GAMMA}:
        out = _charfn_quadrature(model, arr)
    elif fam == nm.FAMILY_GAUSSIAN:
        s = model["sigma"]
        out = np.exp(-0.5 * s * s * arr * arr) + 0j
    elif fam == nm.FAMILY_EXPONENTIAL:
        lam = model["lambda"]
        out = lam / (lam - 1j * arr)
    elif fam == nm.FAMILY_LAPLACE:
        b = model["scale"]
        out = 1.0 / (1.0 + b * b * arr * arr) + 0j
    elif fam == nm.FAMILY_UNIFORM:
        lo, hi = model["lo"], model["hi"]
        half = 0.5 * (hi - lo)
        out = np.exp(0.5j * (lo + hi) * arr) * np.sinc(half * arr / math.pi)
    else:
        raise DomainError(f"Unsupported family {fam!r}.")

    return complex(out) if arr.ndim == 0 else out


def input_law_charfn(law: InputLaw, t):
    arr = np.asarray(t, dtype=float)
    if law.kind == KIND_GAUSSIAN:
        out = np.exp(-0.5 * law.variance * arr * arr) + 0j
    elif law.kind == KIND_MIXTURE:
        w = 1.0 - law.mass_at_zero
        out = law.mass_at_zero + w * law.rate / (law.rate - 1j * arr)
    else:
        raise DomainError(f"Unknown input law kind {law.kind!r}.")
    return complex(out) if arr.ndim == 0 else out


def charfn_factorization_residual(
    model: NoiseModel,
    law: InputLaw,
    gamma: float,
    t_grid=None,
) -> float:
    """max over t of |phi_Z~(t) - phi_Z(t) phi_X(t)|."""
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    phi_tilt = characteristic_function(tilted_model(model, gamma), t)
    phi_z = characteristic_function(model, t)
    phi_x = input_law_charfn(law, t)
    return float(np.max(np.abs(phi_tilt - phi_z * phi_x)))


def ks_check(
    model: NoiseModel,
    law: InputLaw,
    gamma: float,
    samples: int,
    rng: RandomStream,
    significance: float = 1e-3,
) -> KSResult:
    """Kolmogorov-Smirnov comparison of X + Z draws with the tilted CDF."""
    y = sample_input(law, rng, samples) + nm.sample(model, rng, samples)
    target = nm.to_scipy(tilted_model(model, gamma))
    res = sp_stats.kstest(y, target.cdf)
    return KSResult(
        statistic=float(res.statistic),
        pvalue=float(res.pvalue),
        samples=int(samples),
        passed=bool(res.pvalue >= significance),
    )

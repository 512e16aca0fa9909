"""
Escort (tilted) noise laws p~ = alpha * p_Z^(1-gamma) and the gamma_n solvers that
tie the tilt to a covertness budget.

Every catalog family is closed under tilting, so the tilted law is again a
NoiseModel and its KL divergence / entropy have closed forms. The identity and
quadrature paths exist to cross-check those closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict

from . import noise_models as nm
from .errors import (
    BlocklengthTooSmallError,
    DegenerateNoiseError,
    DomainError,
    GammaRangeError,
    IntegrabilityError,
)
from .noise_models import NoiseModel
from .numerics import find_root, integrate
from .settings import DEFAULT_CHI, DEFAULT_ZETA, GAMMA_BOUNDARY_EPS, GAMMA_BRACKET_CAP

MODE_CONVERSE = "converse"
MODE_ACHIEVABILITY = "achievability"

UNIFORM_DIAGNOSTIC = (
    "Uniform noise: any output law with finite divergence from the noise must equal it, "
    "so covert communication is not possible (L = 0)."
)


@dataclass(frozen=True)
class TiltedNoise:
    base: NoiseModel
    gamma: float
    alpha: float
    law: NoiseModel  # p~ as a catalog model

    @property
    def log_alpha(self) -> float:
        return math.log(self.alpha)


@dataclass(frozen=True)
class CovertBudget:
    delta: float
    n: int
    gamma_n: float
    chi: float
    mode: str
    divergence: float  # n * D(P_Z~ || P_Z)


# ----------------------------
# Construction
# ----------------------------

def _check_gamma(gamma: float, zeta: float | None) -> None:
    upper = 1.0 if zeta is None else 1.0 - zeta
    if not (math.isfinite(gamma) and 0.0 <= gamma < upper):
        raise DomainError(f"gamma must lie in [0, {upper:g}), got {gamma!r}.")


def tilted_model(base: NoiseModel, gamma: float) -> NoiseModel:
    """The law proportional to p_Z^(1-gamma), as a member of the base family."""
    if gamma == 0.0:
        return base
    keep = 1.0 - gamma
    fam = base.family

    if fam == nm.FAMILY_GAUSSIAN:
        return nm.gaussian(base["sigma"] / math.sqrt(keep))
    if fam == nm.FAMILY_EXPONENTIAL:
        return nm.exponential(keep * base["lambda"])
    if fam == nm.FAMILY_LAPLACE:
        return nm.laplace(base["scale"] / keep)
    if fam == nm.FAMILY_GEN_GAUSSIAN:
        p = base["p"]
        return nm.generalized_gaussian(p, base["sigma"] * keep ** (-1.0 / p))
    if fam == nm.FAMILY_GEN_GAMMA:
        r, s, beta = base["r"], base["sigma"], base["beta"]
        r_tilt = ((beta * r - 1.0) * keep + 1.0) / beta
        return nm.generalized_gamma(r_tilt, s * keep ** (-1.0 / beta), beta)
    if fam == nm.FAMILY_UNIFORM:
        return base
    raise DomainError(f"No tilted family for {fam!r}.")


def _reference_point(model: NoiseModel) -> float:
    fam = model.family
    if fam == nm.FAMILY_EXPONENTIAL:
        return 1.0 / model["lambda"]
    if fam == nm.FAMILY_GEN_GAMMA:
        return model["sigma"]
    if fam == nm.FAMILY_UNIFORM:
        return 0.5 * (model["lo"] + model["hi"])
    return 0.0


def alpha_quadrature(base: NoiseModel, gamma: float) -> float:
    """alpha = (∫ p_Z^(1-gamma))^(-1) by quadrature."""
    keep = 1.0 - gamma
    res = nm.expect(base, lambda lp, z: math.exp(-gamma * lp))  # p * p^(-gamma) = p^(1-gamma)
    if not (res.converged and math.isfinite(res.value) and res.value > 0):
        raise IntegrabilityError(
            f"∫ p_Z^{keep:g} dz diverges for {base} (integrability condition on p_Z^zeta).",
            term="integral_zeta",
        )
    return 1.0 / res.value


def make_tilted(base: NoiseModel, gamma: float, zeta: float | None = None) -> TiltedNoise:
    """
    Tilt base by gamma. zeta, when given, enforces gamma < 1 - zeta; without it the
    admissible range is [0, 1), since every catalog family satisfies the integrability
    conditions for every zeta in (0, 1).
    """
    _check_gamma(gamma, zeta)
    if gamma == 0.0:
        return TiltedNoise(base=base, gamma=0.0, alpha=1.0, law=base)

    law = tilted_model(base, gamma)
    z0 = _reference_point(base)
    log_alpha = nm.log_pdf(law, z0) - (1.0 - gamma) * nm.log_pdf(base, z0)
    return TiltedNoise(base=base, gamma=gamma, alpha=math.exp(log_alpha), law=law)


# ----------------------------
# Divergence and entropy
# ----------------------------

_SCALE_FAMILY_SHAPE = {
    nm.FAMILY_EXPONENTIAL: lambda m: 1.0,
    nm.FAMILY_LAPLACE: lambda m: 1.0,
    nm.FAMILY_GAUSSIAN: lambda m: 2.0,
    nm.FAMILY_GEN_GAUSSIAN: lambda m: m["p"],
}


def _kl_identity(t: TiltedNoise) -> float:
    # D = gamma/(1-gamma) h(Z~) + ln(alpha)/(1-gamma)
    h_tilt = nm.differential_entropy(t.law)
    return (t.gamma * h_tilt + t.log_alpha) / (1.0 - t.gamma)


def _kl_quadrature(t: TiltedNoise) -> float:
    def integrand(z: float) -> float:
        lq = nm.log_pdf(t.law, z)
        if lq == -math.inf:
            return 0.0
        return math.exp(lq) * (lq - nm.log_pdf(t.base, z))

    res = integrate(integrand, nm.support(t.law), 1e-12, 1e-10, points=nm.break_points(t.law))
    return res.require(f"D(P_Z~ || P_Z) for {t.base}, gamma={t.gamma}")


def kl_tilted_to_base(t: TiltedNoise, method: str = "closed") -> float:
    """D(P_Z~ || P_Z) in nats."""
    if t.gamma == 0.0:
        return 0.0
    if method == "identity":
        return _kl_identity(t)
    if method == "quadrature":
        return _kl_quadrature(t)
    if method != "closed":
        raise DomainError(f"method must be 'closed', 'identity' or 'quadrature', got {method!r}.")

    shape = _SCALE_FAMILY_SHAPE.get(t.base.family)
    if shape is None:
        return _kl_identity(t)
    g = t.gamma
    # (1/p) [ln(1-gamma) + gamma/(1-gamma)] for scale families exp(-c |z|^p)
    return (math.log1p(-g) + g / (1.0 - g)) / shape(t.base)


def entropy_tilted(t: TiltedNoise, method: str = "closed") -> float:
    """h(Z~) in nats."""
    if method == "quadrature":
        return nm.differential_entropy(t.law, method="quadrature")
    if method == "identity":
        if t.gamma == 0.0:
            return nm.differential_entropy(t.base)
        d = kl_tilted_to_base(t, "closed")
        return -t.log_alpha / t.gamma + (1.0 - t.gamma) / t.gamma * d
    if method != "closed":
        raise DomainError(f"method must be 'closed', 'identity' or 'quadrature', got {method!r}.")
    return nm.differential_entropy(t.law)


def entropy_gap(t: TiltedNoise) -> float:
    """h(Z~) - h(Z); the per-letter mutual information when X + Z has the tilted law."""
    if t.gamma == 0.0:
        return 0.0
    if t.base.family == nm.FAMILY_EXPONENTIAL:
        return -math.log1p(-t.gamma)
    return entropy_tilted(t) - nm.differential_entropy(t.base)


def check_identities(t: TiltedNoise) -> Dict[str, float]:
    """Absolute residuals between the closed, identity and quadrature paths."""
    kl_closed = kl_tilted_to_base(t, "closed")
    h_closed = entropy_tilted(t, "closed")
    return {
        "kl_identity_vs_quadrature": abs(kl_tilted_to_base(t, "identity") - kl_tilted_to_base(t, "quadrature")),
        "kl_closed_vs_quadrature": abs(kl_closed - kl_tilted_to_base(t, "quadrature")),
        "entropy_identity_vs_quadrature": abs(entropy_tilted(t, "identity") - entropy_tilted(t, "quadrature")),
        "entropy_closed_vs_quadrature": abs(h_closed - entropy_tilted(t, "quadrature")),
    }


# ----------------------------
# Taylor expansions
# ----------------------------

def kl_taylor(model: NoiseModel, gamma: float) -> float:
    """Leading term gamma^2/2 * Var[ln p_Z(Z)]."""
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}.")
    return 0.5 * gamma * gamma * nm.log_pdf_variance(model)


def entropy_gap_taylor(model: NoiseModel, gamma: float) -> float:
    """Leading term gamma * Var[ln p_Z(Z)]."""
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}.")
    return gamma * nm.log_pdf_variance(model)


# ----------------------------
# gamma_n solvers
# ----------------------------

def gamma_upper_bracket(zeta: float = DEFAULT_ZETA) -> float:
    return min(GAMMA_BRACKET_CAP, 1.0 - zeta - GAMMA_BOUNDARY_EPS)


def _check_budget_args(delta: float, n: int) -> None:
    if not (math.isfinite(delta) and delta > 0):
        raise DomainError(f"delta must be > 0, got {delta!r}.")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}.")


def solve_gamma_converse(model: NoiseModel, delta: float, n: int, zeta: float = DEFAULT_ZETA) -> float:
    """gamma_n with D(P_Z~ || P_Z) = delta / n."""
    if nm.is_degenerate_uniform(model):
        raise DegenerateNoiseError(UNIFORM_DIAGNOSTIC)
    _check_budget_args(delta, n)

    target = delta / n
    upper = gamma_upper_bracket(zeta)

    def excess(g: float) -> float:
        return kl_tilted_to_base(make_tilted(model, g), "closed") - target

    if excess(upper) < 0:
        raise GammaRangeError(
            f"delta/n = {target:g} exceeds D at the bracket edge gamma={upper:g} for {model}."
        )

    # leading-order guess sqrt(2/Var) * sqrt(delta/n); narrow the bracket around it
    guess = math.sqrt(2.0 * target / nm.log_pdf_variance(model))
    hi = min(upper, 2.0 * guess)
    if excess(hi) < 0:
        hi = upper
    return find_root(excess, (0.0, hi))


def gamma_achievability(model: NoiseModel, delta: float, n: int, chi: float = DEFAULT_CHI) -> float:
    """gamma_n = sqrt( 2/Var[ln p_Z(Z)] * (delta/n - n^-chi) )."""
    if not 1.0 < chi < 1.5:
        raise DomainError(f"chi must lie in (1, 3/2), got {chi!r}.")
    _check_budget_args(delta, n)
    if nm.is_degenerate_uniform(model):
        raise DegenerateNoiseError(UNIFORM_DIAGNOSTIC)

    margin = delta / n - float(n) ** (-chi)
    if margin <= 0:
        raise BlocklengthTooSmallError(
            f"delta/n = {delta / n:g} is not above n^-chi = {float(n) ** (-chi):g}; increase n."
        )
    gamma = math.sqrt(2.0 * margin / nm.log_pdf_variance(model))
    if gamma >= gamma_upper_bracket():
        raise GammaRangeError(f"gamma_n = {gamma:g} is outside the admissible tilt range; increase n.")
    return gamma


def make_budget(
    model: NoiseModel,
    delta: float,
    n: int,
    mode: str = MODE_ACHIEVABILITY,
    chi: float = DEFAULT_CHI,
) -> CovertBudget:
    if mode == MODE_CONVERSE:
        gamma = solve_gamma_converse(model, delta, n)
    elif mode == MODE_ACHIEVABILITY:
        gamma = gamma_achievability(model, delta, n, chi)
    else:
        raise DomainError(f"mode must be {MODE_CONVERSE!r} or {MODE_ACHIEVABILITY!r}, got {mode!r}.")

    divergence = n * kl_tilted_to_base(make_tilted(model, gamma))
    return CovertBudget(delta=delta, n=int(n), gamma_n=gamma, chi=chi, mode=mode, divergence=divergence)

"""
Square-root scaling constant L = sqrt(2 Var[ln p_Z(Z)]).

The value is always an upper bound on L; it is reported as exact only for the
families where a self-decomposable input law is known to exist (Gaussian,
exponential, generalized Gaussian with p <= 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import noise_models as nm
from .errors import DomainError, IntegrabilityError
from .noise_models import NoiseModel
from .numerics import digamma, log_gamma, trigamma
from .settings import DEFAULT_ZETA

BASIS_GAUSSIAN = "Theorem2_Gaussian"
BASIS_EXPONENTIAL = "Theorem2_Exponential"
BASIS_GG_P_LE_1 = "Theorem2_GG_p_le_1"
BASIS_UPPER_ONLY = "UpperBoundOnly"
BASIS_DEGENERATE = "DegenerateZero"

EXACTNESS_BASES = (BASIS_GAUSSIAN, BASIS_EXPONENTIAL, BASIS_GG_P_LE_1, BASIS_UPPER_ONLY, BASIS_DEGENERATE)

_RADICAND_CLAMP = -1e-12


@dataclass(frozen=True)
class ScalingResult:
    L_upper: float
    L_exact: Optional[float]
    exactness_basis: str
    log_pdf_variance: float
    model: str


@dataclass(frozen=True)
class GGammaMoments:
    e_ln_z: float
    e_ln_z_sq: float
    e_zb: float
    e_z2b: float
    e_lnz_zb: float


def _exactness_basis(model: NoiseModel) -> str:
    fam = model.family
    if fam == nm.FAMILY_UNIFORM:
        return BASIS_DEGENERATE
    if fam == nm.FAMILY_GAUSSIAN:
        return BASIS_GAUSSIAN
    if fam == nm.FAMILY_EXPONENTIAL:
        return BASIS_EXPONENTIAL
    if fam == nm.FAMILY_LAPLACE:
        return BASIS_GG_P_LE_1
    if fam == nm.FAMILY_GEN_GAUSSIAN:
        p = model["p"]
        if p == 2.0:
            return BASIS_GAUSSIAN
        return BASIS_GG_P_LE_1 if p <= 1.0 else BASIS_UPPER_ONLY
    return BASIS_UPPER_ONLY


def scaling_constant(model: NoiseModel, method: str = "closed", zeta: float = DEFAULT_ZETA) -> ScalingResult:
    """
    L for a catalog model. method="quadrature" evaluates Var[ln p_Z(Z)] numerically
    after checking the integrability conditions at zeta.
    """
    basis = _exactness_basis(model)
    if basis == BASIS_DEGENERATE:
        return ScalingResult(L_upper=0.0, L_exact=0.0, exactness_basis=basis, log_pdf_variance=0.0, model=str(model))

    if method == "quadrature":
        report = nm.integrability_check(model, zeta)
        if not report.all_finite:
            term = report.divergent_terms[0]
            raise IntegrabilityError(f"{model}: integral {term} diverges at zeta={zeta:g}.", term=term)
        var = nm.log_pdf_variance_quadrature(model)
    elif method == "closed":
        var = nm.log_pdf_variance(model)
    else:
        raise DomainError(f"method must be 'closed' or 'quadrature', got {method!r}.")

    L = math.sqrt(2.0 * max(var, 0.0))
    exact = L if basis != BASIS_UPPER_ONLY else None
    return ScalingResult(L_upper=L, L_exact=exact, exactness_basis=basis, log_pdf_variance=var, model=str(model))


def gg_scaling_upper(p: float) -> float:
    """sqrt(2/p); sigma drops out."""
    if not (math.isfinite(p) and p > 0):
        raise DomainError(f"p must be > 0, got {p!r}.")
    return math.sqrt(2.0 / p)


def ggamma_scaling_upper(r: float, beta: float) -> float:
    """sqrt(2 ((r - 1/beta)^2 trigamma(r) - r + 2/beta))."""
    if not (r > 0 and beta > 0):
        raise DomainError(f"r and beta must be > 0, got r={r!r}, beta={beta!r}.")
    radicand = (r - 1.0 / beta) ** 2 * trigamma(r) - r + 2.0 / beta
    if radicand < _RADICAND_CLAMP:
        raise ArithmeticError(f"Negative radicand {radicand!r} for r={r}, beta={beta}.")
    return math.sqrt(2.0 * max(radicand, 0.0))


# ----------------------------
# Generalized gamma moments
# ----------------------------

def ggamma_moments(r: float, sigma: float, beta: float) -> GGammaMoments:
    if not (r > 0 and sigma > 0 and beta > 0):
        raise DomainError(f"r, sigma, beta must be > 0, got ({r!r}, {sigma!r}, {beta!r}).")
    psi = digamma(r)
    ls = math.log(sigma)
    return GGammaMoments(
        e_ln_z=psi / beta + ls,
        e_ln_z_sq=trigamma(r) / beta**2 + psi**2 / beta**2 + 2.0 * ls * psi / beta + ls**2,
        e_zb=r,
        e_z2b=(r + 1.0) * r,
        e_lnz_zb=(r / beta) * psi + 1.0 / beta + r * ls,
    )


def assemble_ggamma_second_moment(r: float, sigma: float, beta: float) -> float:
    """
    E[(ln p_Z(Z))^2] from the five moments, with
    ln p_Z(z) = c + a ln z - (z/sigma)^beta,  c = ln beta - ln Gamma(r) - beta r ln sigma,  a = beta r - 1.
    """
    m = ggamma_moments(r, sigma, beta)
    c = math.log(beta) - log_gamma(r) - beta * r * math.log(sigma)
    a = beta * r - 1.0
    return (
        c * c
        + a * a * m.e_ln_z_sq
        + m.e_z2b
        + 2.0 * a * c * m.e_ln_z
        - 2.0 * c * m.e_zb
        - 2.0 * a * m.e_lnz_zb
    )

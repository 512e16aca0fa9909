"""
Catalog of additive-noise families.

A NoiseModel is a family tag plus its parameters. Everything else (log-density,
sampler, closed-form statistics, integrability checks) is a module-level function
dispatching on the family, so new families only touch this file.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Tuple

import numpy as np
from scipy import special as sp_special
from scipy import stats as sp_stats

from .errors import ConfigError, DegenerateNoiseWarning, DomainError
from .numerics import (
    POSITIVE_HALF_LINE,
    REAL_LINE,
    Interval,
    RandomStream,
    digamma,
    integrate,
    log_gamma,
    trigamma,
)
from .settings import DEFAULT_ZETA

# ----------------------------
# Family tags
# ----------------------------
FAMILY_GAUSSIAN = "gaussian"
FAMILY_EXPONENTIAL = "exponential"
FAMILY_LAPLACE = "laplace"
FAMILY_GEN_GAUSSIAN = "generalized_gaussian"
FAMILY_GEN_GAMMA = "generalized_gamma"
FAMILY_UNIFORM = "uniform"

FAMILY_PARAMS: Dict[str, Tuple[str, ...]] = {
    FAMILY_GAUSSIAN: ("sigma",),
    FAMILY_EXPONENTIAL: ("lambda",),
    FAMILY_LAPLACE: ("scale",),
    FAMILY_GEN_GAUSSIAN: ("p", "sigma"),
    FAMILY_GEN_GAMMA: ("r", "sigma", "beta"),
    FAMILY_UNIFORM: ("lo", "hi"),
}

FAMILY_ALIASES = {
    "normal": FAMILY_GAUSSIAN,
    "awgn": FAMILY_GAUSSIAN,
    "exp": FAMILY_EXPONENTIAL,
    "gg": FAMILY_GEN_GAUSSIAN,
    "gengauss": FAMILY_GEN_GAUSSIAN,
    "ggamma": FAMILY_GEN_GAMMA,
    "gengamma": FAMILY_GEN_GAMMA,
}


@dataclass(frozen=True)
class NoiseModel:
    family: str
    params: Tuple[Tuple[str, float], ...] = field(default=())

    def __getitem__(self, name: str) -> float:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(f"{self.family} has no parameter {name!r}")

    @property
    def param_dict(self) -> Dict[str, float]:
        return dict(self.params)

    @property
    def support(self) -> Interval:
        return support(self)

    def __str__(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family}({inner})"


@dataclass(frozen=True)
class IntegrabilityReport:
    zeta: float
    integral_plain_log4: float
    integral_zeta: float
    integral_zeta_log4: float
    all_finite: bool
    divergent_terms: Tuple[str, ...] = ()
    uniform_bound: float = math.inf
    spot_checks_ok: bool = False


# ----------------------------
# Construction
# ----------------------------

def canonical_family(family: str) -> str:
    key = (family or "").strip().lower().replace("-", "_")
    key = FAMILY_ALIASES.get(key, key)
    if key not in FAMILY_PARAMS:
        raise ConfigError(f"Unknown noise family {family!r}; expected one of {sorted(FAMILY_PARAMS)}.")
    return key


def make_model(family: str, **params: float) -> NoiseModel:
    fam = canonical_family(family)
    expected = FAMILY_PARAMS[fam]

    unknown = set(params) - set(expected)
    if unknown:
        raise ConfigError(f"{fam}: unknown parameter(s) {sorted(unknown)}; expected {list(expected)}.")
    missing = [name for name in expected if params.get(name) is None]
    if missing:
        raise ConfigError(f"{fam}: missing parameter(s) {missing}.")

    values = {name: float(params[name]) for name in expected}
    if fam == FAMILY_UNIFORM:
        if not (math.isfinite(values["lo"]) and math.isfinite(values["hi"]) and values["lo"] < values["hi"]):
            raise DomainError(f"uniform support must be a finite interval lo < hi, got {values}.")
    else:
        bad = {k: v for k, v in values.items() if not (math.isfinite(v) and v > 0)}
        if bad:
            raise DomainError(f"{fam}: parameters must be strictly positive and finite, got {bad}.")

    return NoiseModel(family=fam, params=tuple((name, values[name]) for name in expected))


def gaussian(sigma: float = 1.0) -> NoiseModel:
    return make_model(FAMILY_GAUSSIAN, sigma=sigma)


def exponential(lam: float = 1.0) -> NoiseModel:
    return make_model(FAMILY_EXPONENTIAL, **{"lambda": lam})


def laplace(scale: float = 1.0) -> NoiseModel:
    return make_model(FAMILY_LAPLACE, scale=scale)


def generalized_gaussian(p: float, sigma: float = 1.0) -> NoiseModel:
    return make_model(FAMILY_GEN_GAUSSIAN, p=p, sigma=sigma)


def generalized_gamma(r: float, sigma: float = 1.0, beta: float = 1.0) -> NoiseModel:
    return make_model(FAMILY_GEN_GAMMA, r=r, sigma=sigma, beta=beta)


def uniform(lo: float = 0.0, hi: float = 1.0) -> NoiseModel:
    return make_model(FAMILY_UNIFORM, lo=lo, hi=hi)


def model_to_dict(model: NoiseModel) -> Dict[str, Any]:
    return {"family": model.family, "params": model.param_dict}


def model_from_dict(data: Mapping[str, Any]) -> NoiseModel:
    """Parse {"family": str, "params": {name: number}}; unknown fields are rejected."""
    if not isinstance(data, Mapping):
        raise ConfigError(f"Noise model must be a JSON object, got {type(data).__name__}.")
    extra = set(data) - {"family", "params"}
    if extra:
        raise ConfigError(f"Unknown noise model field(s) {sorted(extra)}.")
    if "family" not in data:
        raise ConfigError("Noise model is missing 'family'.")
    params = data.get("params") or {}
    if not isinstance(params, Mapping):
        raise ConfigError("Noise model 'params' must be an object.")
    try:
        return make_model(str(data["family"]), **{str(k): v for k, v in params.items()})
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from e


# ----------------------------
# Support and densities
# ----------------------------

def support(model: NoiseModel) -> Interval:
    fam = model.family
    if fam in {FAMILY_EXPONENTIAL, FAMILY_GEN_GAMMA}:
        return POSITIVE_HALF_LINE
    if fam == FAMILY_UNIFORM:
        return Interval(model["lo"], model["hi"])
    return REAL_LINE


def _log_c_p(p: float) -> float:
    """ln c_p with c_p = p / (2^{(p+1)/p} Gamma(1/p))."""
    return math.log(p) - ((p + 1.0) / p) * math.log(2.0) - log_gamma(1.0 / p)


def _log_pdf_array(model: NoiseModel, z: np.ndarray) -> np.ndarray:
    fam = model.family
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam == FAMILY_GAUSSIAN:
            s = model["sigma"]
            return -0.5 * math.log(2.0 * math.pi * s * s) - z * z / (2.0 * s * s)

        if fam == FAMILY_EXPONENTIAL:
            lam = model["lambda"]
            return np.where(z >= 0, math.log(lam) - lam * z, -np.inf)

        if fam == FAMILY_LAPLACE:
            b = model["scale"]
            return -math.log(2.0 * b) - np.abs(z) / b

        if fam == FAMILY_GEN_GAUSSIAN:
            p, s = model["p"], model["sigma"]
            return _log_c_p(p) - math.log(s) - np.abs(z) ** p / (2.0 * s ** p)

        if fam == FAMILY_GEN_GAMMA:
            r, s, beta = model["r"], model["sigma"], model["beta"]
            log_norm = math.log(beta) - log_gamma(r) - beta * r * math.log(s)
            zp = np.where(z >= 0, z, 0.0)
            out = log_norm + sp_special.xlogy(beta * r - 1.0, zp) - (zp / s) ** beta
            return np.where(z >= 0, out, -np.inf)

        if fam == FAMILY_UNIFORM:
            lo, hi = model["lo"], model["hi"]
            return np.where((z >= lo) & (z <= hi), -math.log(hi - lo), -np.inf)

    raise ConfigError(f"Unsupported family {fam!r}.")


def log_pdf(model: NoiseModel, z):
    """ln p_Z(z); -inf off the support. Scalars in, float out; arrays in, arrays out."""
    arr = np.asarray(z, dtype=float)
    out = _log_pdf_array(model, arr)
    return float(out) if arr.ndim == 0 else out


def pdf(model: NoiseModel, z):
    arr = np.asarray(z, dtype=float)
    out = np.exp(_log_pdf_array(model, arr))
    return float(out) if arr.ndim == 0 else out


def sample(model: NoiseModel, rng: RandomStream, count: int) -> np.ndarray:
    if count < 0:
        raise DomainError(f"count must be >= 0, got {count}.")
    if count == 0:
        return np.empty(0, dtype=float)

    fam = model.family
    if fam == FAMILY_GAUSSIAN:
        return rng.normal(0.0, model["sigma"], count)
    if fam == FAMILY_EXPONENTIAL:
        return rng.exponential(1.0 / model["lambda"], count)
    if fam == FAMILY_LAPLACE:
        return rng.laplace(0.0, model["scale"], count)
    if fam == FAMILY_GEN_GAUSSIAN:
        p, s = model["p"], model["sigma"]
        # |Z|^p / (2 sigma^p) ~ Gamma(1/p, 1)
        g = rng.gamma(1.0 / p, 1.0, count)
        sign = np.where(rng.random(count) < 0.5, -1.0, 1.0)
        return sign * s * (2.0 * g) ** (1.0 / p)
    if fam == FAMILY_GEN_GAMMA:
        r, s, beta = model["r"], model["sigma"], model["beta"]
        return s * rng.gamma(r, 1.0, count) ** (1.0 / beta)
    if fam == FAMILY_UNIFORM:
        return rng.uniform(model["lo"], model["hi"], count)
    raise ConfigError(f"Unsupported family {fam!r}.")


def to_scipy(model: NoiseModel):
    """Equivalent frozen scipy.stats distribution (CDF, quantiles)."""
    fam = model.family
    if fam == FAMILY_GAUSSIAN:
        return sp_stats.norm(loc=0.0, scale=model["sigma"])
    if fam == FAMILY_EXPONENTIAL:
        return sp_stats.expon(scale=1.0 / model["lambda"])
    if fam == FAMILY_LAPLACE:
        return sp_stats.laplace(scale=model["scale"])
    if fam == FAMILY_GEN_GAUSSIAN:
        p = model["p"]
        return sp_stats.gennorm(beta=p, scale=model["sigma"] * 2.0 ** (1.0 / p))
    if fam == FAMILY_GEN_GAMMA:
        return sp_stats.gengamma(a=model["r"], c=model["beta"], scale=model["sigma"])
    if fam == FAMILY_UNIFORM:
        return sp_stats.uniform(loc=model["lo"], scale=model["hi"] - model["lo"])
    raise ConfigError(f"Unsupported family {fam!r}.")


def is_degenerate_uniform(model: NoiseModel) -> bool:
    return model.family == FAMILY_UNIFORM


def max_density(model: NoiseModel) -> float:
    """b = sup p_Z; +inf when the density is unbounded (generalized gamma with beta*r < 1)."""
    fam = model.family
    if fam == FAMILY_GAUSSIAN:
        return 1.0 / (math.sqrt(2.0 * math.pi) * model["sigma"])
    if fam == FAMILY_EXPONENTIAL:
        return model["lambda"]
    if fam == FAMILY_LAPLACE:
        return 1.0 / (2.0 * model["scale"])
    if fam == FAMILY_GEN_GAUSSIAN:
        return math.exp(_log_c_p(model["p"])) / model["sigma"]
    if fam == FAMILY_GEN_GAMMA:
        r, s, beta = model["r"], model["sigma"], model["beta"]
        if beta * r < 1.0:
            return math.inf
        mode = s * ((beta * r - 1.0) / beta) ** (1.0 / beta)
        return math.exp(log_pdf(model, mode))
    if fam == FAMILY_UNIFORM:
        return 1.0 / (model["hi"] - model["lo"])
    raise ConfigError(f"Unsupported family {fam!r}.")


# ----------------------------
# Quadrature helpers
# ----------------------------

def break_points(model: NoiseModel) -> Tuple[float, ...]:
    fam = model.family
    if fam == FAMILY_GEN_GAMMA:
        return (model["sigma"],)
    if fam == FAMILY_EXPONENTIAL:
        return (1.0 / model["lambda"],)
    if fam == FAMILY_UNIFORM:
        return ()
    return (0.0,)


def expect(
    model: NoiseModel,
    g: Callable[[float, float], float],
    *,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
):
    """
    Quadrature of E[g(ln p_Z(Z), Z)] over the support. Points where p_Z = 0
    contribute nothing.
    """

    def integrand(z: float) -> float:
        lp = log_pdf(model, z)
        if lp == -math.inf:
            return 0.0
        return math.exp(lp) * g(lp, z)

    return integrate(integrand, support(model), abs_tol, rel_tol, points=break_points(model))


# ----------------------------
# Closed-form statistics
# ----------------------------

def log_pdf_variance(model: NoiseModel) -> float:
    """
    Var[ln p_Z(Z)] by closed form. Uniform noise is the degenerate case: the log-density
    is constant, the variance is exactly 0, and a DegenerateNoiseWarning flags it.
    """
    fam = model.family
    if fam == FAMILY_GAUSSIAN:
        return 0.5
    if fam in {FAMILY_EXPONENTIAL, FAMILY_LAPLACE}:
        return 1.0
    if fam == FAMILY_GEN_GAUSSIAN:
        return 1.0 / model["p"]
    if fam == FAMILY_GEN_GAMMA:
        r, beta = model["r"], model["beta"]
        return (r - 1.0 / beta) ** 2 * trigamma(r) - r + 2.0 / beta
    if fam == FAMILY_UNIFORM:
        warnings.warn(
            f"[noise_models] {model}: log-density is constant, Var[ln p_Z(Z)] = 0; "
            "covert communication is not possible over uniform noise.",
            DegenerateNoiseWarning,
        )
        return 0.0
    raise ConfigError(f"Unsupported family {fam!r}.")


def log_pdf_variance_quadrature(model: NoiseModel) -> float:
    """Two-pass quadrature: m = E[ln p], then E[(ln p - m)^2]."""
    m = expect(model, lambda lp, z: lp).require("E[ln p_Z(Z)]")
    return expect(model, lambda lp, z: (lp - m) ** 2).require("Var[ln p_Z(Z)]")


def differential_entropy(model: NoiseModel, method: str = "closed") -> float:
    """h(Z) in nats."""
    if method == "quadrature":
        return -expect(model, lambda lp, z: lp).require("h(Z)")
    if method != "closed":
        raise DomainError(f"method must be 'closed' or 'quadrature', got {method!r}.")

    fam = model.family
    if fam == FAMILY_GAUSSIAN:
        s = model["sigma"]
        return 0.5 * math.log(2.0 * math.pi * math.e * s * s)
    if fam == FAMILY_EXPONENTIAL:
        return 1.0 - math.log(model["lambda"])
    if fam == FAMILY_LAPLACE:
        return 1.0 + math.log(2.0 * model["scale"])
    if fam == FAMILY_GEN_GAUSSIAN:
        p, s = model["p"], model["sigma"]
        return math.log(s) - _log_c_p(p) + 1.0 / p
    if fam == FAMILY_GEN_GAMMA:
        r, s, beta = model["r"], model["sigma"], model["beta"]
        return log_gamma(r) + math.log(s / beta) + r + (1.0 / beta - r) * digamma(r)
    if fam == FAMILY_UNIFORM:
        return math.log(model["hi"] - model["lo"])
    raise ConfigError(f"Unsupported family {fam!r}.")


def log_pdf_mean(model: NoiseModel) -> float:
    """E[ln p_Z(Z)] = -h(Z)."""
    return -differential_entropy(model)


# ----------------------------
# Integrability conditions
# ----------------------------

def integrability_check_density(
    log_density: Callable[[float], float],
    domain: Interval,
    zeta: float = DEFAULT_ZETA,
    *,
    points: Tuple[float, ...] = (),
) -> IntegrabilityReport:
    """
    Evaluate the three integrals
        I1 = ∫ p (ln p)^4,   I2 = ∫ p^zeta,   I3 = ∫ p^zeta (ln p)^4
    for an arbitrary log-density. A term that fails to converge to a finite value
    is reported as divergent.

    When all three are finite, the uniform bound ∫ (p + p^zeta)(1 + (ln p)^4)
    is computed and ∫ p^nu |ln p|^k is spot-checked against it for k in 0..4,
    nu in {zeta, (1+zeta)/2, 1}.
    """
    if not 0.0 < zeta < 1.0:
        raise DomainError(f"zeta must lie in (0, 1), got {zeta}.")

    def power_integral(nu: float, k: int):
        def integrand(z: float) -> float:
            lp = log_density(z)
            if lp == -math.inf:
                return 0.0
            return math.exp(nu * lp) * abs(lp) ** k

        return integrate(integrand, domain, 1e-10, 1e-8, points=points)

    terms = {
        "integral_plain_log4": power_integral(1.0, 4),
        "integral_zeta": power_integral(zeta, 0),
        "integral_zeta_log4": power_integral(zeta, 4),
    }
    divergent = tuple(
        name for name, res in terms.items() if not (res.converged and math.isfinite(res.value))
    )
    all_finite = not divergent

    uniform_bound = math.inf
    spot_ok = False
    if all_finite:
        # (p + p^zeta)(1 + ln^4) expands into the four integrals below
        uniform_bound = (
            1.0
            + terms["integral_plain_log4"].value
            + terms["integral_zeta"].value
            + terms["integral_zeta_log4"].value
        )
        spot_ok = True
        for nu in (zeta, 0.5 * (1.0 + zeta), 1.0):
            for k in range(5):
                res = power_integral(nu, k)
                if not res.converged or res.value > uniform_bound * (1.0 + 1e-8):
                    spot_ok = False

    return IntegrabilityReport(
        zeta=zeta,
        integral_plain_log4=terms["integral_plain_log4"].value,
        integral_zeta=terms["integral_zeta"].value,
        integral_zeta_log4=terms["integral_zeta_log4"].value,
        all_finite=all_finite,
        divergent_terms=divergent,
        uniform_bound=uniform_bound,
        spot_checks_ok=spot_ok,
    )


def integrability_check(model: NoiseModel, zeta: float = DEFAULT_ZETA) -> IntegrabilityReport:
    return integrability_check_density(
        lambda z: log_pdf(model, z),
        support(model),
        zeta,
        points=break_points(model),
    )

"""
Shared numerical kernels: adaptive quadrature, bracketed root finding,
gamma-family special functions and the reproducible random stream.

Quadrature is QUADPACK via scipy.integrate.quad (adaptive Gauss-Kronrod; infinite
ranges are mapped to a finite interval before subdivision). Root finding is
scipy's Brent method, i.e. bisection safeguarding secant / inverse-quadratic steps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize as sp_optimize
from scipy import special as sp_special

from .errors import BracketError, DomainError, QuadratureError, QuadratureWarning
from .settings import DEFAULT_ABS_TOL, DEFAULT_REL_TOL, DEFAULT_ROOT_TOL, QUAD_SUBDIVISION_LIMIT

RandomStream = np.random.Generator

_UINT64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise DomainError("Interval bounds must not be NaN.")
        if not self.lower < self.upper:
            raise DomainError(f"Interval requires lower < upper, got [{self.lower}, {self.upper}].")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, z: float) -> bool:
        return self.lower <= z <= self.upper


REAL_LINE = Interval(-math.inf, math.inf)
POSITIVE_HALF_LINE = Interval(0.0, math.inf)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    converged: bool

    def require(self, what: str = "integral") -> float:
        """Return the value, or raise QuadratureError carrying the partial value."""
        if not self.converged:
            raise QuadratureError(
                f"{what} did not converge (partial value {self.value!r}, "
                f"error estimate {self.abs_error_estimate!r}).",
                partial_value=self.value,
            )
        return self.value


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def wrapped(z: float) -> float:
        v = float(f(z))
        if math.isnan(v):
            raise QuadratureError(f"Integrand returned NaN at z={z!r}.", abscissa=float(z))
        return v

    return wrapped


def _run_quad(args: tuple, kwargs: dict, abs_tol: float, rel_tol: float) -> QuadratureResult:
    with warnings.catch_warnings():
        # QUADPACK problems are reported through ier / message below
        warnings.simplefilter("ignore", sp_integrate.IntegrationWarning)
        out = sp_integrate.quad(*args, full_output=1, **kwargs)

    value, abserr = float(out[0]), float(out[1])
    clean_exit = len(out) == 3  # a message is only appended when ier > 0
    tol = max(abs_tol, rel_tol * abs(value))
    converged = clean_exit and math.isfinite(value) and math.isfinite(abserr) and abserr <= tol

    if not converged:
        msg = out[3] if len(out) > 3 else "error estimate above tolerance"
        warnings.warn(
            f"[numerics] quadrature did not converge: {msg!s} "
            f"(partial value {value!r}, error estimate {abserr!r}).",
            QuadratureWarning,
        )
    return QuadratureResult(value=value, abs_error_estimate=abs(abserr), converged=converged)


def integrate(
    f: Callable[[float], float],
    domain: Interval,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    points: Tuple[float, ...] | None = None,
    limit: int = QUAD_SUBDIVISION_LIMIT,
) -> QuadratureResult:
    """
    Integrate f over domain (finite, semi-infinite or infinite).

    Non-convergence is not an error: the partial value comes back with
    converged=False and a QuadratureWarning. A NaN from the integrand raises
    QuadratureError naming the abscissa.
    """
    if abs_tol <= 0 or rel_tol <= 0:
        raise DomainError("Quadrature tolerances must be positive.")

    kwargs = dict(epsabs=abs_tol, epsrel=rel_tol, limit=limit)
    if points and domain.is_finite:
        kwargs["points"] = [p for p in points if domain.lower < p < domain.upper] or None
    elif points:
        # QUADPACK ignores break points on infinite ranges; split there instead
        inner = sorted(p for p in points if domain.lower < p < domain.upper)
        edges = [domain.lower, *inner, domain.upper]
        parts = [
            integrate(f, Interval(a, b), abs_tol / len(edges), rel_tol, limit=limit)
            for a, b in zip(edges[:-1], edges[1:])
        ]
        return QuadratureResult(
            value=math.fsum(p.value for p in parts),
            abs_error_estimate=math.fsum(p.abs_error_estimate for p in parts),
            converged=all(p.converged for p in parts),
        )

    return _run_quad((_checked(f), domain.lower, domain.upper), kwargs, abs_tol, rel_tol)


def integrate_fourier(
    f: Callable[[float], float],
    t: float,
    part: str,
    domain: Interval,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
) -> QuadratureResult:
    """
    Integrate f(z)*cos(t z) (part="cos") or f(z)*sin(t z) (part="sin") over domain,
    using QUADPACK's oscillatory rules. The real line is split at 0.
    """
    if part not in {"cos", "sin"}:
        raise DomainError(f"part must be 'cos' or 'sin', got {part!r}.")

    if t == 0.0:
        if part == "sin":
            return QuadratureResult(0.0, 0.0, True)
        return integrate(f, domain, abs_tol, rel_tol)

    if math.isinf(domain.lower) and math.isinf(domain.upper):
        right = integrate_fourier(f, t, part, POSITIVE_HALF_LINE, abs_tol / 2, rel_tol)
        # z -> -z on the left half: cos is even, sin is odd
        left = integrate_fourier(lambda z: f(-z), t, part, POSITIVE_HALF_LINE, abs_tol / 2, rel_tol)
        sign = 1.0 if part == "cos" else -1.0
        return QuadratureResult(
            value=right.value + sign * left.value,
            abs_error_estimate=right.abs_error_estimate + left.abs_error_estimate,
            converged=right.converged and left.converged,
        )

    if math.isinf(domain.lower):
        # mirror (-inf, b] onto [-b, inf)
        mirrored = integrate_fourier(lambda z: f(-z), t, part, Interval(-domain.upper, math.inf), abs_tol, rel_tol)
        sign = 1.0 if part == "cos" else -1.0
        return QuadratureResult(sign * mirrored.value, mirrored.abs_error_estimate, mirrored.converged)

    kwargs = dict(weight=part, wvar=t, epsabs=abs_tol)
    if domain.is_finite:
        kwargs.update(epsrel=rel_tol, limit=QUAD_SUBDIVISION_LIMIT)
    return _run_quad((_checked(f), domain.lower, domain.upper), kwargs, abs_tol, rel_tol)


def find_root(
    f: Callable[[float], float],
    bracket: Tuple[float, float],
    tol: float = DEFAULT_ROOT_TOL,
    *,
    max_iterations: int = 200,
) -> float:
    """Bracketed root of a continuous scalar function (Brent: bisection + secant/IQI)."""
    a, b = float(bracket[0]), float(bracket[1])
    if a > b:
        a, b = b, a
    fa, fb = f(a), f(b)
    if math.isnan(fa) or math.isnan(fb):
        raise BracketError(f"Function is NaN at the bracket ends ({a}, {b}).")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise BracketError(
            f"No sign change on [{a}, {b}]: f(a)={fa!r}, f(b)={fb!r}."
        )

    root, info = sp_optimize.brentq(f, a, b, xtol=tol, maxiter=max_iterations, full_output=True, disp=False)
    if not info.converged:
        raise BracketError(f"Root search on [{a}, {b}] stopped after {info.iterations} iterations: {info.flag}.")
    return float(root)


# ---------- Special functions ----------

def _positive(x, name: str):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} requires x > 0, got {x!r}.")
    return arr


def _scalar_or_array(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def log_gamma(x):
    return _scalar_or_array(sp_special.gammaln(_positive(x, "log_gamma")))


def digamma(x):
    return _scalar_or_array(sp_special.digamma(_positive(x, "digamma")))


def trigamma(x):
    return _scalar_or_array(sp_special.polygamma(1, _positive(x, "trigamma")))


# ---------- Random streams ----------

def make_rng(seed: int) -> RandomStream:
    """
    Deterministic stream for a 64-bit seed.

    Philox (counter-based) keyed by the seed; the sequence is fixed by numpy's
    bit-generator contract and identical across platforms.
    """
    return np.random.Generator(np.random.Philox(int(seed) & _UINT64_MASK))


def derived_seed(base_seed: int, index: int) -> int:
    """Seed for the index-th independent stream (base_seed + index, wrapped to 64 bits)."""
    return (int(base_seed) + int(index)) & _UINT64_MASK

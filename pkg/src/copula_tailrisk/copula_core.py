"""
Clayton and Gumbel copulas
--------------------------

Generators, CDFs, conditional distributions, densities and the joint
tail-risk functionals of the two one-parameter Archimedean families.

Everything density-related is computed in log space from ``-log t``. The
density is assembled from generator derivatives through the Archimedean
identity

.. math::
    c_\\theta(u, v) = -\\frac{\\varphi''(C)\\,\\varphi'(u)\\,\\varphi'(v)}{\\varphi'(C)^3},

so a new family only needs ``_log_abs_dphi``, ``_log_d2phi`` and
``_neglog_cdf``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

__all__ = [
    "Family",
    "Functional",
    "CopulaModel",
    "TailSpec",
    "generator_phi",
    "generator_dphi",
    "generator_d2phi",
    "copula_cdf",
    "copula_partial_v",
    "copula_partial_u",
    "copula_density",
    "log_copula_density",
    "archimedean_log_density",
    "clayton_log_density",
    "tail_risk",
    "tail_risk_values",
    "tail_risk_derivative",
    "independence_baseline",
]

ArrayLike = npt.ArrayLike

# Above this, expm1(a) is indistinguishable from exp(a) and the log-sum form is used.
_LOGSUM_SWITCH = 30.0


class Family(str, enum.Enum):
    """One-parameter Archimedean family."""

    CLAYTON = "clayton"
    GUMBEL = "gumbel"

    @property
    def theta_lower(self) -> float:
        return 0.0 if self is Family.CLAYTON else 1.0

    def admits(self, theta: float) -> bool:
        if not math.isfinite(theta):
            return False
        if self is Family.CLAYTON:
            return theta > 0.0
        return theta >= 1.0

    @classmethod
    def parse(cls, value: str | Family) -> Family:
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown copula family {value!r}") from None


class Functional(str, enum.Enum):
    """Which joint tail probability: lower, upper, or conditional lower."""

    LOWER = "L"
    UPPER = "U"
    CONDITIONAL = "C"

    @classmethod
    def parse(cls, value: str | Functional) -> Functional:
        if isinstance(value, Functional):
            return value
        key = str(value).strip().upper()
        aliases = {"LOWER": "L", "UPPER": "U", "CONDITIONAL": "C"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown tail functional {value!r}") from None


@dataclass(frozen=True)
class CopulaModel:
    family: Family
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "theta", float(self.theta))
        if not self.family.admits(self.theta):
            bound = "> 0" if self.family is Family.CLAYTON else ">= 1"
            raise ValueError(
                f"{self.family.value} requires finite theta {bound}, got {self.theta}"
            )

    @property
    def is_independence(self) -> bool:
        return self.family is Family.GUMBEL and self.theta == 1.0


@dataclass(frozen=True)
class TailSpec:
    alpha: float = 0.05
    functional: Functional = Functional.LOWER

    def __post_init__(self):
        object.__setattr__(self, "functional", Functional.parse(self.functional))
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


def independence_baseline(alpha: float) -> float:
    """Joint lower (or upper) tail probability alpha**2 under independence."""
    return alpha * alpha


# ---------------------------------------------------------------------------
# family primitives, all in terms of nl = -log t >= 0; theta may be an array
# ---------------------------------------------------------------------------


def _log_abs_dphi(family: Family, theta, nl):
    if family is Family.CLAYTON:
        return (theta + 1.0) * nl
    with np.errstate(divide="ignore"):
        return np.log(theta) + (theta - 1.0) * np.log(nl) + nl


def _log_d2phi(family: Family, theta, nl):
    if family is Family.CLAYTON:
        return np.log1p(theta) + (theta + 2.0) * nl
    with np.errstate(divide="ignore"):
        return np.log(theta) + (theta - 2.0) * np.log(nl) + np.log(theta - 1.0 + nl) + 2.0 * nl


def _clayton_log_s(theta, nu, nv):
    """log(u^-theta + v^-theta - 1) without overflow or cancellation."""
    a = theta * nu
    b = theta * nv
    m = np.maximum(a, b)
    small = np.log1p(np.expm1(np.minimum(a, _LOGSUM_SWITCH)) + np.expm1(np.minimum(b, _LOGSUM_SWITCH)))
    mm = np.maximum(m, _LOGSUM_SWITCH)
    large = mm + np.log(np.exp(a - mm) + np.exp(b - mm) - np.exp(-mm))
    return np.where(m > _LOGSUM_SWITCH, large, small)


def _neglog_cdf(family: Family, theta, nu, nv):
    """-log C(u, v) from -log u and -log v."""
    if family is Family.CLAYTON:
        return _clayton_log_s(theta, nu, nv) / theta
    with np.errstate(divide="ignore"):
        log_s = np.logaddexp(theta * np.log(nu), theta * np.log(nv))
    return np.exp(log_s / theta)


# ---------------------------------------------------------------------------
# input checks
# ---------------------------------------------------------------------------


def _as_interior(name: str, x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValueError(f"{name} must lie strictly inside (0, 1)")
    return arr


def _scalarize(out: np.ndarray):
    return out.item() if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# generator
# ---------------------------------------------------------------------------


def generator_phi(model: CopulaModel, t: ArrayLike):
    """Generator phi_theta(t) on (0, 1]; phi(1) = 0."""
    t = np.asarray(t, dtype=float)
    if not np.all((t > 0.0) & (t <= 1.0)):
        raise ValueError("generator argument must lie in (0, 1]")
    nl = -np.log(t)
    if model.family is Family.CLAYTON:
        out = np.expm1(model.theta * nl) / model.theta
    else:
        out = nl**model.theta
    return _scalarize(out)


def _derivative_domain(model: CopulaModel, t: ArrayLike) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    # t = 1 is only regular where -log t enters with a nonnegative power
    allow_one = model.family is Family.CLAYTON or model.theta == 1.0
    ok = (t > 0.0) & ((t < 1.0) | (allow_one & (t == 1.0)))
    if not np.all(ok):
        raise ValueError(f"generator derivative undefined at t outside (0, 1) for {model.family.value}")
    return t


def generator_dphi(model: CopulaModel, t: ArrayLike):
    """First derivative phi'_theta(t) < 0."""
    t = _derivative_domain(model, t)
    if model.is_independence:
        return _scalarize(-1.0 / t)
    return _scalarize(-np.exp(_log_abs_dphi(model.family, model.theta, -np.log(t))))


def generator_d2phi(model: CopulaModel, t: ArrayLike):
    """Second derivative phi''_theta(t) > 0."""
    t = _derivative_domain(model, t)
    if model.is_independence:
        return _scalarize(1.0 / t**2)
    return _scalarize(np.exp(_log_d2phi(model.family, model.theta, -np.log(t))))


# ---------------------------------------------------------------------------
# copula
# ---------------------------------------------------------------------------


def copula_cdf(model: CopulaModel, u: ArrayLike, v: ArrayLike):
    """C_theta(u, v) for interior points."""
    u = _as_interior("u", u)
    v = _as_interior("v", v)
    if model.is_independence:
        return _scalarize(u * v)
    return _scalarize(np.exp(-_neglog_cdf(model.family, model.theta, -np.log(u), -np.log(v))))


def copula_partial_v(model: CopulaModel, u: ArrayLike, v: ArrayLike):
    """dC/dv = phi'(v) / phi'(C(u, v)), the conditional CDF of U given V = v."""
    u = _as_interior("u", u)
    v = _as_interior("v", v)
    if model.is_independence:
        return _scalarize(np.broadcast_to(u, np.broadcast(u, v).shape).copy())
    f, th = model.family, model.theta
    nv = -np.log(v)
    nc = _neglog_cdf(f, th, -np.log(u), nv)
    out = np.exp(_log_abs_dphi(f, th, nv) - _log_abs_dphi(f, th, nc))
    return _scalarize(np.minimum(out, 1.0))


def copula_partial_u(model: CopulaModel, u: ArrayLike, v: ArrayLike):
    """dC/du; both families are exchangeable so this mirrors copula_partial_v."""
    return copula_partial_v(model, v, u)


def archimedean_log_density(family: Family, theta, u: ArrayLike, v: ArrayLike) -> np.ndarray:
    """Log density assembled from the generator derivatives.

    ``theta`` may be an array broadcastable against ``u`` and ``v``; no
    domain checks are made here.
    """
    family = Family.parse(family)
    theta = np.asarray(theta, dtype=float)
    nu = -np.log(np.asarray(u, dtype=float))
    nv = -np.log(np.asarray(v, dtype=float))
    nc = _neglog_cdf(family, theta, nu, nv)
    out = (
        _log_d2phi(family, theta, nc)
        + _log_abs_dphi(family, theta, nu)
        + _log_abs_dphi(family, theta, nv)
        - 3.0 * _log_abs_dphi(family, theta, nc)
    )
    if family is Family.GUMBEL:
        out = np.where(theta == 1.0, 0.0, out)
    return out


def clayton_log_density(theta, u: ArrayLike, v: ArrayLike) -> np.ndarray:
    """Closed-form Clayton log density
    log(theta+1) - (theta+1) log(uv) - (2 + 1/theta) log(u^-theta + v^-theta - 1).
    """
    theta = np.asarray(theta, dtype=float)
    nu = -np.log(np.asarray(u, dtype=float))
    nv = -np.log(np.asarray(v, dtype=float))
    return np.log1p(theta) + (theta + 1.0) * (nu + nv) - (2.0 + 1.0 / theta) * _clayton_log_s(theta, nu, nv)


def _log_density(family: Family, theta, u, v) -> np.ndarray:
    if family is Family.CLAYTON:
        return clayton_log_density(theta, u, v)
    return archimedean_log_density(family, theta, u, v)


def log_copula_density(model: CopulaModel, u: ArrayLike, v: ArrayLike):
    """log c_theta(u, v), finite for interior points at any admissible theta."""
    u = _as_interior("u", u)
    v = _as_interior("v", v)
    out = _log_density(model.family, model.theta, u, v)
    if np.any(np.isnan(out)):
        raise FloatingPointError(f"log density evaluated to NaN for {model}")
    return _scalarize(out)


def copula_density(model: CopulaModel, u: ArrayLike, v: ArrayLike):
    """c_theta(u, v) = exp(log_copula_density)."""
    return _scalarize(np.exp(np.asarray(log_copula_density(model, u, v))))


# ---------------------------------------------------------------------------
# tail-risk functionals
# ---------------------------------------------------------------------------


def _diagonal_cdf(family: Family, theta, x: float):
    """C_theta(x, x) in closed form, theta broadcastable."""
    nx = -math.log(x)
    if family is Family.CLAYTON:
        # (2 x^-theta - 1)^(-1/theta)
        return np.exp(-_clayton_log_s(theta, nx, nx) / theta)
    # x^(2^(1/theta))
    return np.exp(-np.exp2(1.0 / theta) * nx)


def tail_risk_values(family: Family, theta: ArrayLike, alpha: float, functional: Functional):
    """Vectorized tail risk R_T(theta) over an array of parameters."""
    family = Family.parse(family)
    functional = Functional.parse(functional)
    theta = np.asarray(theta, dtype=float)
    if functional is Functional.UPPER:
        out = (2.0 * alpha - 1.0) + _diagonal_cdf(family, theta, 1.0 - alpha)
        out = np.maximum(out, 0.0)
    else:
        out = _diagonal_cdf(family, theta, alpha)
        if functional is Functional.CONDITIONAL:
            out = out / alpha
    return _scalarize(np.asarray(out))


def tail_risk(model: CopulaModel, spec: TailSpec) -> float:
    """Joint tail probability R_T(theta) at level alpha.

    Lower is C(a, a), Upper is 2a - 1 + C(1-a, 1-a), Conditional is C(a, a)/a.
    """
    if model.is_independence:
        a = spec.alpha
        base = {Functional.LOWER: a * a, Functional.UPPER: a * a, Functional.CONDITIONAL: a}
        return base[spec.functional]
    return float(tail_risk_values(model.family, model.theta, spec.alpha, spec.functional))


def tail_risk_derivative(
    model: CopulaModel,
    spec: TailSpec,
    bounds: tuple[float, float] | None = None,
) -> float:
    """Numerical dR_T/dtheta by central differences.

    The step is ``max(1e-5, 1e-5 * theta)``. Within one step of ``bounds``
    (defaulting to the family's admissible range) a one-sided difference
    is used instead.
    """
    lo, hi = bounds if bounds is not None else (model.family.theta_lower, math.inf)
    th = model.theta
    h = max(1e-5, 1e-5 * th)

    def r(x):
        return tail_risk(CopulaModel(model.family, x), spec)

    lower_ok = th - h >= lo and model.family.admits(th - h)
    if model.family is Family.CLAYTON and th - h <= 0.0:
        lower_ok = False
    upper_ok = th + h <= hi
    if lower_ok and upper_ok:
        return (r(th + h) - r(th - h)) / (2.0 * h)
    if upper_ok:
        return (r(th + h) - r(th)) / h
    if lower_ok:
        return (r(th) - r(th - h)) / h
    raise ValueError(f"no room for a finite difference at theta={th} within {bounds}")

"""Core model quantities: parameter records, response curves, scalings, vector
fields, and nullclines, all as pure evaluations.

The planar system couples a dimensionless global temperature theta with a
dimensionless ice-sheet extent lambda:

    dtheta/dtau = mu * [1 + beta - gamma*(alpha1 + alpha2*lambda)
                        - (1 - gamma)*albedo(theta) - theta]
    dlambda/dtau = sqrt(lambda) * [(1 + xi(theta))*(1 - 4*lambda) - 1]

where albedo and xi are bounded monotone sigmoid responses of theta. The full
variant keeps the snow-line elevation eps and switches between accumulation,
stagnation, and nucleation regimes of the mass balance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.special import erf

from .errors import (
    ComplexSnowline,
    ConfigError,
    DomainError,
    NonDifferentiablePoint,
    OutOfProfile,
    ScaleError,
)

SECONDS_PER_YEAR = 365.25 * 86400.0


class SigmoidFamily(enum.Enum):
    """Odd sigmoid shapes sigma with sigma(+-inf) = +-1 and sigma' >= 0."""

    TANH = "tanh"
    LOGISTIC = "logistic"
    ERF = "erf"
    PIECEWISE_LINEAR = "piecewise_linear"


def _tanh_derivs(x, order: int):
    t = np.tanh(x)
    if order == 0:
        return t
    s = 1.0 - t * t
    if order == 1:
        return s
    if order == 2:
        return -2.0 * t * s
    return (6.0 * t * t - 2.0) * s


def sigmoid_eval(family: SigmoidFamily, x, order: int = 0):
    """Evaluate sigma^(order)(x) for the given family, order in 0..3.

    Accepts scalars or numpy arrays. The piecewise-linear ramp clamp(x, -1, 1)
    has no derivative exactly at |x| = 1; orders >= 1 there raise
    NonDifferentiablePoint rather than picking a one-sided value.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be in 0..3, got {order}")
    if family is SigmoidFamily.TANH:
        return _tanh_derivs(x, order)
    if family is SigmoidFamily.LOGISTIC:
        # 2/(1 + e^-x) - 1 == tanh(x/2), so derivatives scale by 2^-order.
        return _tanh_derivs(np.asarray(x) / 2.0, order) / 2.0**order
    if family is SigmoidFamily.ERF:
        xa = np.asarray(x, dtype=float)
        if order == 0:
            return erf(x) if np.isscalar(x) else erf(xa)
        d1 = (2.0 / math.sqrt(math.pi)) * np.exp(-xa * xa)
        if order == 1:
            res = d1
        elif order == 2:
            res = -2.0 * xa * d1
        else:
            res = (4.0 * xa * xa - 2.0) * d1
        return float(res) if np.isscalar(x) else res
    # piecewise-linear ramp
    xa = np.asarray(x, dtype=float)
    if order == 0:
        res = np.clip(xa, -1.0, 1.0)
        return float(res) if np.isscalar(x) else res
    if np.any(np.abs(xa) == 1.0):
        raise NonDifferentiablePoint(
            f"piecewise-linear sigmoid has no order-{order} derivative at |x| = 1"
        )
    res = np.where(np.abs(xa) < 1.0, 1.0, 0.0) if order == 1 else np.zeros_like(xa)
    return float(res) if np.isscalar(x) else res


@dataclass(frozen=True)
class SigmoidResponse:
    """Bounded monotone response theta -> value between two saturation limits.

    value(theta) = (limit_plus + limit_minus)/2
                   + (limit_plus - limit_minus)/2 * sigma((theta - center)/steepness)

    Decreasing responses (ocean albedo) have limit_plus < limit_minus.
    """

    limit_minus: float
    limit_plus: float
    center: float
    steepness: float
    family: SigmoidFamily = SigmoidFamily.TANH

    def __post_init__(self):
        if not self.steepness > 0:
            raise ConfigError(f"steepness must be positive, got {self.steepness}")

    @classmethod
    def from_dict(cls, data: dict, where: str = "curve") -> "SigmoidResponse":
        if not isinstance(data, dict):
            raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
        allowed = {"family", "limit_minus", "limit_plus", "center", "steepness"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
        missing = allowed - set(data)
        if missing:
            raise ConfigError(f"{where}: missing keys {sorted(missing)}")
        try:
            family = SigmoidFamily(str(data["family"]).lower())
        except ValueError:
            names = [f.value for f in SigmoidFamily]
            raise ConfigError(f"{where}: family must be one of {names}") from None
        return cls(
            limit_minus=float(data["limit_minus"]),
            limit_plus=float(data["limit_plus"]),
            center=float(data["center"]),
            steepness=float(data["steepness"]),
            family=family,
        )

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "limit_minus": self.limit_minus,
            "limit_plus": self.limit_plus,
            "center": self.center,
            "steepness": self.steepness,
        }


def response_eval(curve: SigmoidResponse, theta, order: int = 0):
    """Evaluate the response or its order-1..3 theta-derivative."""
    if np.isscalar(theta):
        z = (theta - curve.center) / curve.steepness
    else:
        z = (np.asarray(theta, dtype=float) - curve.center) / curve.steepness
    half_span = 0.5 * (curve.limit_plus - curve.limit_minus)
    if order == 0:
        return 0.5 * (curve.limit_plus + curve.limit_minus) + half_span * sigmoid_eval(
            curve.family, z, 0
        )
    return half_span * sigmoid_eval(curve.family, z, order) / curve.steepness**order


def _check_dict_keys(data: dict, allowed: set[str], required: set[str], where: str):
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(data)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional inputs (SI units unless noted).

    Q : W m^-2, solar constant
    gamma : continent area fraction
    A, B : W m^-2 and W m^-2 K^-1, linear longwave flux A + B*T (A < 0)
    tau0 : Pa, ice yield stress
    rho_i : kg m^-3, ice density
    grav : m s^-2
    s : dimensionless 0-degree-isotherm slope
    h0 : m, isotherm height over the Arctic Ocean (may be negative)
    c : J m^-2 K^-1, column heat capacity
    m_rate : m yr^-1, ablation rate
    a_rate : m yr^-1, accumulation rate (informational; the model uses the
        accum response curve for the a/m ratio)
    alpha1, alpha2 : continental albedo alpha1 + alpha2*lambda
    albedo, accum : response curves in dimensionless theta units
    """

    Q: float
    gamma: float
    A: float
    B: float
    tau0: float
    rho_i: float
    s: float
    h0: float
    c: float
    m_rate: float
    alpha1: float
    alpha2: float
    albedo: SigmoidResponse
    accum: SigmoidResponse
    grav: float = 9.81
    a_rate: float | None = None

    def __post_init__(self):
        for name in ("Q", "B", "tau0", "rho_i", "grav", "c", "m_rate"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.alpha2 > 0:
            raise ConfigError(f"alpha2 must be positive, got {self.alpha2}")
        if not self.s > 0:
            raise ConfigError(f"s must be positive, got {self.s}")
        if not self.A < 0:
            raise ConfigError(f"A must be negative so that beta = -4A/Q > 0, got {self.A}")

    @classmethod
    def from_dict(cls, data: dict, where: str = "physical") -> "PhysicalParams":
        field_names = {f.name for f in fields(cls)}
        required = field_names - {"grav", "a_rate"}
        _check_dict_keys(data, field_names, required, where)
        kwargs = {}
        for key, value in data.items():
            if key in ("albedo", "accum"):
                kwargs[key] = SigmoidResponse.from_dict(value, f"{where}.{key}")
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters of the planar system."""

    beta: float
    gamma: float
    alpha1: float
    alpha2: float
    epsilon: float
    albedo: SigmoidResponse
    accum: SigmoidResponse

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.alpha2 > 0:
            raise ConfigError(f"alpha2 must be positive, got {self.alpha2}")
        for name in ("albedo", "accum"):
            curve: SigmoidResponse = getattr(self, name)
            for lim in (curve.limit_minus, curve.limit_plus):
                if not 0.0 <= lim <= 1.0:
                    raise ConfigError(f"{name} limits must lie in [0, 1], got {lim}")

    @classmethod
    def from_dict(cls, data: dict, where: str = "model") -> "ModelParams":
        field_names = {f.name for f in fields(cls)}
        _check_dict_keys(data, field_names, field_names, where)
        kwargs = {}
        for key, value in data.items():
            if key in ("albedo", "accum"):
                kwargs[key] = SigmoidResponse.from_dict(value, f"{where}.{key}")
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)

    def with_overrides(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class Scales:
    """Conversion scales between dimensionless and dimensional quantities.

    t_star is stored in years (t_star_unit records that choice explicitly).
    """

    T_star: float
    L_star: float
    t_star: float
    mu: float
    t_star_unit: str = "yr"

    def __post_init__(self):
        for name in ("T_star", "L_star", "t_star", "mu"):
            value = getattr(self, name)
            if not value > 0:
                raise ScaleError(name, value)


@dataclass(frozen=True)
class State:
    """Dimensionless state (theta, lambda). lambda <= 1/4 holds along simplified
    trajectories but is not enforced here: the full model admits larger sheets."""

    theta: float
    lam: float

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta}")
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")


@dataclass(frozen=True)
class DimensionalState:
    """Dimensional counterpart of State: temperature in K, extent in m."""

    T_kelvin: float
    l_m: float


class Regime(enum.Enum):
    """Mass-balance regime of the full model."""

    ACCUMULATING = "accumulating"
    STAGNANT = "stagnant"
    NUCLEATION = "nucleation"


def continental_albedo(params: ModelParams, lam: float) -> float:
    """Linear continental albedo alpha1 + alpha2*lambda (lambda >= 0)."""
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    return params.alpha1 + params.alpha2 * lam


def sheet_height_scale(tau0: float, rho_i: float, grav: float) -> float:
    """Ice-sheet height scale H = sqrt(4*tau0/(3*rho_i*grav)), units m^(1/2)."""
    return math.sqrt(4.0 * tau0 / (3.0 * rho_i * grav))


def ice_profile_height(x: float, l: float, H: float) -> float:
    """Parabolic sheet profile h(x) = H*sqrt(l)*sqrt(1 - |x|/l), 0 at the rim."""
    if not l > 0:
        raise DomainError(f"sheet extent l must be positive, got {l}")
    if abs(x) > l:
        raise OutOfProfile(f"|x| = {abs(x)} exceeds the sheet extent l = {l}")
    return H * math.sqrt(l) * math.sqrt(1.0 - abs(x) / l)


def lambda0(lam: float, epsilon: float) -> float:
    """Dimensionless snow-line position on the sheet.

    lambda0 = (1/lambda) * [-(eps + lambda + 1/2) + sqrt(eps + 2*lambda + 1/4)].

    Negative values mean the ablation zone covers the whole sheet. For
    lambda >= -eps/2 the radicand is at least 1/4, so the square root is safe;
    a negative radicand (possible only for strongly negative eps and small
    lambda) raises ComplexSnowline.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    radicand = epsilon + 2.0 * lam + 0.25
    if radicand < 0:
        raise ComplexSnowline(
            f"radicand eps + 2*lambda + 1/4 = {radicand} < 0 at lambda = {lam}"
        )
    return (-(epsilon + lam + 0.5) + math.sqrt(radicand)) / lam


def nondimensionalize(p: PhysicalParams) -> tuple[ModelParams, Scales]:
    """Derive dimensionless parameters and conversion scales.

    T* = Q/(4B)                    [K]
    H  = sqrt(4*tau0/(3*rho_i*g))  [m^(1/2)]
    L* = H^2/s^2                   [m]
    eps = s*h0/H^2
    t* = (3/2)*H^2/(m*s)           [yr]  (m in m/yr)
    mu = (3/2)*B*H^2/(m*s*c)       (m converted to m/s)
    beta = -4A/Q

    The response-curve centers and steepnesses are already in dimensionless
    theta units and pass through unchanged.
    """
    H = sheet_height_scale(p.tau0, p.rho_i, p.grav)
    T_star = p.Q / (4.0 * p.B)
    L_star = H * H / (p.s * p.s)
    eps = p.s * p.h0 / (H * H)
    t_star = 1.5 * H * H / (p.m_rate * p.s)
    m_per_second = p.m_rate / SECONDS_PER_YEAR
    mu = 1.5 * p.B * H * H / (m_per_second * p.s * p.c)
    beta = -4.0 * p.A / p.Q
    scales = Scales(T_star=T_star, L_star=L_star, t_star=t_star, mu=mu)
    model = ModelParams(
        beta=beta,
        gamma=p.gamma,
        alpha1=p.alpha1,
        alpha2=p.alpha2,
        epsilon=eps,
        albedo=p.albedo,
        accum=p.accum,
    )
    return model, scales


def _F_bracket(params: ModelParams, theta: float, lam: float) -> float:
    """Energy-balance bracket; dtheta/dtau = mu * bracket."""
    return (
        1.0
        + params.beta
        - params.gamma * (params.alpha1 + params.alpha2 * lam)
        - (1.0 - params.gamma) * response_eval(params.albedo, theta, 0)
        - theta
    )


def _G_simplified(params: ModelParams, theta: float, lam: float) -> float:
    xi = response_eval(params.accum, theta, 0)
    return math.sqrt(lam) * ((1.0 + xi) * (1.0 - 4.0 * lam) - 1.0)


def vector_field(params: ModelParams, mu: float, s: State) -> tuple[float, float]:
    """Right-hand side (dtheta/dtau, dlambda/dtau) of the simplified system."""
    if not s.lam > 0:
        raise DomainError(f"lambda must be positive, got {s.lam}")
    return (
        mu * _F_bracket(params, s.theta, s.lam),
        _G_simplified(params, s.theta, s.lam),
    )


def _full_regime(params: ModelParams, lam: float) -> Regime:
    # Nucleation check first: for eps < 0 the sheet below the snow line grows
    # from scratch regardless of the lambda0 sign.
    if params.epsilon < 0 and lam < -params.epsilon / 2.0:
        return Regime.NUCLEATION
    if lambda0(lam, params.epsilon) >= 0:
        return Regime.ACCUMULATING
    return Regime.STAGNANT


def _G_full(params: ModelParams, theta: float, lam: float, regime: Regime) -> float:
    if regime is Regime.NUCLEATION:
        xi = response_eval(params.accum, theta, 0)
        return -(xi / (2.0 * math.sqrt(lam))) * params.epsilon
    if regime is Regime.ACCUMULATING:
        xi = response_eval(params.accum, theta, 0)
        return math.sqrt(lam) * ((1.0 + xi) * lambda0(lam, params.epsilon) - 1.0)
    return -math.sqrt(lam)


def vector_field_full(
    params: ModelParams, mu: float, s: State
) -> tuple[float, float, Regime]:
    """Right-hand side of the full mass-balance system with its regime label.

    The temperature equation is identical to the simplified one. The ice
    equation switches between three regimes of the snow-line position:
    nucleation (eps < 0, lambda < -eps/2), accumulating (lambda0 >= 0), and
    stagnant (lambda0 < 0, whole sheet ablating).
    """
    if not s.lam > 0:
        raise DomainError(f"lambda must be positive, got {s.lam}")
    regime = _full_regime(params, s.lam)
    return (
        mu * _F_bracket(params, s.theta, s.lam),
        _G_full(params, s.theta, s.lam, regime),
        regime,
    )


def nullcline_f(params: ModelParams, theta, order: int = 0):
    """Temperature nullcline f(theta) (the lambda value zeroing dtheta/dtau) or
    its derivatives.

    f(theta) = (1/alpha2) * [(1/gamma)*(1 + beta - (1-gamma)*albedo(theta)
               - theta) - alpha1]
    f'(theta) = -(1/(gamma*alpha2)) * ((1-gamma)*albedo'(theta) + 1)
    f^(k)(theta) = -((1-gamma)/(gamma*alpha2)) * albedo^(k)(theta), k >= 2
    """
    g, a2 = params.gamma, params.alpha2
    if order == 0:
        alb = response_eval(params.albedo, theta, 0)
        return ((1.0 + params.beta - (1.0 - g) * alb - theta) / g - params.alpha1) / a2
    d = response_eval(params.albedo, theta, order)
    if order == 1:
        return -((1.0 - g) * d + 1.0) / (g * a2)
    return -(1.0 - g) * d / (g * a2)


def nullcline_g(params: ModelParams, theta, order: int = 0):
    """Ice nullcline g(theta) = xi/(4*(1 + xi)) or its theta-derivatives."""
    xi = response_eval(params.accum, theta, 0)
    if order == 0:
        return 0.25 * xi / (1.0 + xi)
    x1 = response_eval(params.accum, theta, 1)
    if order == 1:
        return 0.25 * x1 / (1.0 + xi) ** 2
    x2 = response_eval(params.accum, theta, 2)
    if order == 2:
        return (x2 * (1.0 + xi) - 2.0 * x1 * x1) / (4.0 * (1.0 + xi) ** 3)
    x3 = response_eval(params.accum, theta, 3)
    return (
        x3 * (1.0 + xi) ** 2 - 6.0 * x1 * x2 * (1.0 + xi) + 6.0 * x1**3
    ) / (4.0 * (1.0 + xi) ** 4)


def to_dimensional(s, scales: Scales):
    """Convert a State (or anything with .theta/.lam) to kelvin and meters."""
    return DimensionalState(T_kelvin=scales.T_star * s.theta, l_m=scales.L_star * s.lam)


def from_dimensional(d: DimensionalState, scales: Scales) -> State:
    """Exact inverse of to_dimensional."""
    return State(theta=d.T_kelvin / scales.T_star, lam=d.l_m / scales.L_star)

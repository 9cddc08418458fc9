"""Third-order building thermal dynamics.

The building is lumped into three temperature nodes:

  T_in  indoor air
  T_m   heat-accumulating layer in inner walls and floor
  T_e   house envelope

Energy balances over the three nodes give a linear state-space model

  dT/dt = A T + B u,    y = C T = T_in

with input u = [T_ambient, irradiance, sigma * cop * P_hvac].  All
resistances are in degC/kW, capacitances in kWh/degC, powers in kW and
time in hours, so the entries of A carry units of 1/h.

Solar energy entering through the windows (irradiance * window_area) is
split between the wall layer (fraction ``solar_fraction_walls``) and the
indoor air (the rest).  The HVAC contribution is the electrical input
power scaled by the coefficient of performance and signed by the
operating mode: +1 heats the air node, -1 cools it.

Discretization is exact zero-order hold,

  A_d = expm(A * t_s),    B_d = int_0^{t_s} expm(A q) dq * B,

computed in one shot via the matrix exponential of the augmented block
matrix [[A, B], [0, 0]] * t_s.  A forward-Euler step is deliberately NOT
used here; it survives only as a small-step oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import InvalidParameterError

COOLING = -1
HEATING = +1


def _frozen_array(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BuildingThermalParams:
    """Physical parameters of one building.

    Resistances in degC/kW, capacitances in kWh/degC, window area in m2.
    ``solar_fraction_walls`` is the share of window solar gain absorbed by
    the wall layer; the remainder heats the indoor air directly.  ``cop``
    converts electrical HVAC input power to thermal output power and
    ``mode`` is +1 for heating, -1 for cooling.
    """

    r_a: float
    r_m: float
    r_e: float
    r_ea: float
    c_air: float
    c_m: float
    c_e: float
    window_area: float = 0.0
    solar_fraction_walls: float = 0.0
    cop: float = 1.0
    mode: int = COOLING

    def __post_init__(self):
        for name in ("r_a", "r_m", "r_e", "r_ea", "c_air", "c_m", "c_e"):
            if not getattr(self, name) > 0.0:
                raise InvalidParameterError(f"{name} must be strictly positive")
        if self.window_area < 0.0:
            raise InvalidParameterError("window_area must be non-negative")
        if not 0.0 <= self.solar_fraction_walls <= 1.0:
            raise InvalidParameterError("solar_fraction_walls must lie in [0, 1]")
        if not self.cop > 0.0:
            raise InvalidParameterError("cop must be strictly positive")
        if self.mode not in (HEATING, COOLING):
            raise InvalidParameterError("mode must be +1 (heating) or -1 (cooling)")


def synthetic_house_params(mode: int = COOLING, cop: float = 3.0) -> BuildingThermalParams:
    """A documented synthetic default house.

    Magnitudes are realistic for a detached single-family house
    (resistances of a few degC/kW, capacitances of a few to tens of
    kWh/degC) but the values are this package's own defaults, not taken
    from any published estimate.
    """
    return BuildingThermalParams(
        r_a=5.0,
        r_m=2.0,
        r_e=4.0,
        r_ea=4.0,
        c_air=3.0,
        c_m=10.0,
        c_e=8.0,
        window_area=10.0,
        solar_fraction_walls=0.7,
        cop=cop,
        mode=mode,
    )


@dataclass(frozen=True)
class ContinuousThermalModel:
    """Continuous-time state-space matrices. ``a`` is compartmental."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen_array(self.a, (3, 3)))
        object.__setattr__(self, "b", _frozen_array(self.b, (3, 3)))
        object.__setattr__(self, "c", _frozen_array(self.c, (1, 3)))


@dataclass(frozen=True)
class DiscreteThermalModel:
    """Zero-order-hold discretization of a :class:`ContinuousThermalModel`."""

    a_d: np.ndarray
    b_d: np.ndarray
    c_d: np.ndarray
    t_s: float

    def __post_init__(self):
        object.__setattr__(self, "a_d", _frozen_array(self.a_d, (3, 3)))
        object.__setattr__(self, "b_d", _frozen_array(self.b_d, (3, 3)))
        object.__setattr__(self, "c_d", _frozen_array(self.c_d, (1, 3)))
        if not self.t_s > 0.0:
            raise InvalidParameterError("t_s must be strictly positive")
        if not np.all(np.isfinite(self.a_d)):
            raise InvalidParameterError("a_d entries must be finite")


@dataclass(frozen=True)
class ThermalState:
    """Node temperatures in degC."""

    t_in: float
    t_m: float
    t_e: float

    def __post_init__(self):
        if not all(np.isfinite([self.t_in, self.t_m, self.t_e])):
            raise InvalidParameterError("state temperatures must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.t_in, self.t_m, self.t_e], dtype=float)

    @staticmethod
    def from_array(arr) -> "ThermalState":
        return ThermalState(float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True)
class ThermalInput:
    """Exogenous input for one sampling interval.

    ``hvac_input_power`` is the electrical power drawn by the HVAC unit;
    the mode sign and COP are applied inside :func:`step` so one
    discretized model serves both heating and cooling studies.
    """

    ambient: float
    irradiance: float = 0.0
    hvac_input_power: float = 0.0

    def __post_init__(self):
        if self.irradiance < 0.0:
            raise InvalidParameterError("irradiance must be non-negative")
        if self.hvac_input_power < 0.0:
            raise InvalidParameterError("hvac_input_power must be non-negative")


def build_continuous_model(params: BuildingThermalParams) -> ContinuousThermalModel:
    """Assemble the 3x3 continuous state-space matrices from physical parameters."""
    p = params
    a = np.zeros((3, 3))
    a[0, 0] = -(1.0 / p.r_a + 1.0 / p.r_m + 1.0 / p.r_e) / p.c_air
    a[0, 1] = 1.0 / (p.r_m * p.c_air)
    a[0, 2] = 1.0 / (p.r_e * p.c_air)
    a[1, 0] = 1.0 / (p.r_m * p.c_m)
    a[1, 1] = -1.0 / (p.r_m * p.c_m)
    a[2, 0] = 1.0 / (p.r_e * p.c_e)
    a[2, 2] = -(1.0 / p.r_ea + 1.0 / p.r_e) / p.c_e

    b = np.zeros((3, 3))
    b[0, 0] = 1.0 / (p.r_a * p.c_air)
    b[0, 1] = p.window_area * (1.0 - p.solar_fraction_walls) / p.c_air
    b[0, 2] = 1.0 / p.c_air
    b[1, 1] = p.window_area * p.solar_fraction_walls / p.c_m
    b[2, 0] = 1.0 / (p.r_ea * p.c_e)

    c = np.array([[1.0, 0.0, 0.0]])
    return ContinuousThermalModel(a=a, b=b, c=c)


def discretize(cont: ContinuousThermalModel, t_s: float) -> DiscreteThermalModel:
    """Exact zero-order hold over a sampling interval of ``t_s`` hours.

    Uses the augmented-matrix identity

      expm([[A, B], [0, 0]] * t_s) = [[A_d, B_d], [0, I]]

    so A_d and the input integral B_d come out of a single scaling-and-
    squaring matrix exponential.
    """
    if not t_s > 0.0:
        raise InvalidParameterError("t_s must be strictly positive")
    aug = np.zeros((6, 6))
    aug[:3, :3] = cont.a * t_s
    aug[:3, 3:] = cont.b * t_s
    big = expm(aug)
    return DiscreteThermalModel(a_d=big[:3, :3], b_d=big[:3, 3:], c_d=cont.c, t_s=t_s)


def build_discrete_model(params: BuildingThermalParams, t_s: float) -> DiscreteThermalModel:
    """Convenience: continuous model construction followed by discretization."""
    return discretize(build_continuous_model(params), t_s)


def step(
    model: DiscreteThermalModel,
    mode_sign: int,
    cop: float,
    state: ThermalState,
    inp: ThermalInput,
) -> ThermalState:
    """Advance the state one sampling interval under constant input."""
    u = np.array([inp.ambient, inp.irradiance, mode_sign * cop * inp.hvac_input_power])
    nxt = model.a_d @ state.as_array() + model.b_d @ u
    return ThermalState.from_array(nxt)


def simulate(
    model: DiscreteThermalModel,
    mode_sign: int,
    cop: float,
    initial: ThermalState,
    inputs,
) -> list[ThermalState]:
    """Iterate :func:`step`; returns the trajectory including the initial state."""
    inputs = list(inputs)
    if not inputs:
        raise InvalidParameterError("input sequence must be non-empty")
    traj = [initial]
    for inp in inputs:
        traj.append(step(model, mode_sign, cop, traj[-1], inp))
    return traj


def spectral_radius(model: DiscreteThermalModel) -> float:
    """Largest eigenvalue magnitude of a_d; < 1 for stable buildings."""
    return float(np.max(np.abs(np.linalg.eigvals(model.a_d))))

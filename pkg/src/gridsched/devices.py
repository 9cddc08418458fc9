"""Pure device models: EV battery and travel, stationary battery,
conventional generating units, and renewable power curves.

These are used both by the schedulers (to derive model coefficients)
and by the test suite (as independent oracles against solver output).
All functions are pure and all spec types are frozen dataclasses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleTripError, InvalidDispatchError, InvalidParameterError
from .thermal import BuildingThermalParams


@dataclass(frozen=True)
class EvSpec:
    """Electric-vehicle battery and charger ratings.

    SOC quantities are dimensionless fractions of ``capacity`` (kWh).
    ``travel_efficiency`` is energy per unit distance; the distance unit
    (km or miles) is declared by the configuration and must match the
    unit used in :class:`TripPlan` distances -- no silent conversion.
    """

    capacity: float
    eta_c: float
    eta_d: float
    p_charge_max: float
    p_discharge_max: float
    soc_min: float
    soc_max: float
    soc_initial: float
    travel_efficiency: float

    def __post_init__(self):
        if not self.capacity > 0.0:
            raise InvalidParameterError("capacity must be positive")
        if not (0.0 < self.eta_c <= 1.0 and 0.0 < self.eta_d <= 1.0):
            raise InvalidParameterError("efficiencies must lie in (0, 1]")
        if not (self.p_charge_max > 0.0 and self.p_discharge_max >= 0.0):
            raise InvalidParameterError("charger ratings must be positive")
        if not 0.0 <= self.soc_min < self.soc_max <= 1.0:
            raise InvalidParameterError("need 0 <= soc_min < soc_max <= 1")
        if not self.soc_min <= self.soc_initial <= self.soc_max:
            raise InvalidParameterError("soc_initial must lie within [soc_min, soc_max]")
        if self.travel_efficiency < 0.0:
            raise InvalidParameterError("travel_efficiency must be non-negative")


@dataclass(frozen=True)
class Trip:
    """One away-from-home interval: gone during slots [depart_slot, return_slot)."""

    depart_slot: int
    return_slot: int
    distance: float

    def __post_init__(self):
        if self.depart_slot >= self.return_slot:
            raise InvalidParameterError("depart_slot must precede return_slot")
        if self.distance < 0.0:
            raise InvalidParameterError("distance must be non-negative")


@dataclass(frozen=True)
class TripPlan:
    """Ordered, non-overlapping trips over a scheduling horizon.

    Slot indices are 1-based.  The derived availability flag for slot t
    is 1 exactly when t is outside every [depart_slot, return_slot).
    """

    trips: tuple[Trip, ...] = ()

    def __post_init__(self):
        trips = tuple(self.trips)
        object.__setattr__(self, "trips", trips)
        prev_return = 0
        for tr in trips:
            if tr.depart_slot < 1:
                raise InvalidParameterError("trip slots are 1-based")
            if tr.depart_slot < prev_return:
                raise InvalidParameterError("trips must be ordered and non-overlapping")
            prev_return = tr.return_slot

    def availability(self, horizon: int) -> np.ndarray:
        """{0,1} home flag per slot 1..horizon."""
        avail = np.ones(horizon, dtype=int)
        for tr in self.trips:
            lo = max(tr.depart_slot, 1)
            hi = min(tr.return_slot, horizon + 1)
            if lo <= horizon:
                avail[lo - 1 : hi - 1] = 0
        return avail


@dataclass(frozen=True)
class HvacSpec:
    """HVAC rating, building parameters, and per-slot comfort settings.

    The per-slot arrays have one entry per scheduling slot and refer to
    the indoor temperature at the END of that slot (the temperature a
    slot's power can influence): entry t applies to time point t+1.
    """

    rated_power: float
    thermal: BuildingThermalParams
    desired_temp: np.ndarray
    max_deviation: np.ndarray
    occupancy: np.ndarray
    discomfort_weight: np.ndarray

    def __post_init__(self):
        if not self.rated_power > 0.0:
            raise InvalidParameterError("rated_power must be positive")
        for name in ("desired_temp", "max_deviation", "occupancy", "discomfort_weight"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float)).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = len(self.desired_temp)
        for name in ("max_deviation", "occupancy", "discomfort_weight"):
            if len(getattr(self, name)) != n:
                raise InvalidParameterError("per-slot series must have equal length")
        if np.any(self.max_deviation < 0.0):
            raise InvalidParameterError("max_deviation must be non-negative")
        if not np.all(np.isin(self.occupancy, (0.0, 1.0))):
            raise InvalidParameterError("occupancy must be binary")

    @property
    def slots(self) -> int:
        return len(self.desired_temp)


def hvac_series(value, horizon: int) -> np.ndarray:
    """Broadcast a scalar (or pass through a length-``horizon`` series)."""
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        return np.full(horizon, float(arr[0]))
    if arr.size != horizon:
        raise InvalidParameterError(f"series length {arr.size} != horizon {horizon}")
    return arr.astype(float)


@dataclass(frozen=True)
class BatterySpec:
    """Stationary battery with a linear degradation (wear) cost in $/kWh."""

    capacity: float
    e_min: float
    e_max: float
    p_charge_max: float
    p_discharge_max: float
    eta_c: float = 0.95  # package default; Table-style data sheets often omit these
    eta_d: float = 0.95
    degradation_cost: float = 0.0
    e_initial: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.e_min <= self.e_initial <= self.e_max <= self.capacity):
            raise InvalidParameterError("need 0 <= e_min <= e_initial <= e_max <= capacity")
        if not (self.p_charge_max > 0.0 and self.p_discharge_max > 0.0):
            raise InvalidParameterError("power ratings must be positive")
        if not (0.0 < self.eta_c <= 1.0 and 0.0 < self.eta_d <= 1.0):
            raise InvalidParameterError("efficiencies must lie in (0, 1]")
        if self.degradation_cost < 0.0:
            raise InvalidParameterError("degradation_cost must be non-negative")


@dataclass(frozen=True)
class ConventionalUnit:
    """Dispatchable unit with a convex piecewise-linear production cost.

    ``segments`` is an ordered list of (marginal_cost $/kWh, width kW)
    pairs covering [p_min, p_max]; marginal costs must be non-decreasing
    so greedy in-order filling prices any output correctly.
    ``initial_status`` counts hours already ON (positive) or OFF
    (negative) before slot 1.  ``fixed_cost`` is charged per committed
    slot.
    """

    p_min: float
    p_max: float
    segments: tuple[tuple[float, float], ...]
    fixed_cost: float
    startup_cost: float
    shutdown_cost: float
    ramp_up: float
    ramp_down: float
    min_up: int
    min_down: int
    initial_status: int
    name: str = "unit"

    def __post_init__(self):
        segs = tuple((float(c), float(w)) for c, w in self.segments)
        object.__setattr__(self, "segments", segs)
        if not 0.0 < self.p_min <= self.p_max:
            raise InvalidParameterError("need 0 < p_min <= p_max")
        if any(w < 0.0 for _, w in segs):
            raise InvalidParameterError("segment widths must be non-negative")
        total = sum(w for _, w in segs)
        if abs(total - (self.p_max - self.p_min)) > 1e-9 * max(1.0, self.p_max):
            raise InvalidParameterError("segment widths must sum to p_max - p_min")
        costs = [c for c, _ in segs]
        if any(b < a for a, b in zip(costs, costs[1:])):
            raise InvalidParameterError("marginal costs must be non-decreasing")
        if self.min_up < 0 or self.min_down < 0:
            raise InvalidParameterError("min_up and min_down must be non-negative")
        if self.ramp_up < 0 or self.ramp_down < 0:
            raise InvalidParameterError("ramp rates must be non-negative")
        if self.initial_status == 0:
            raise InvalidParameterError("initial_status must be nonzero (signed hours)")

    @property
    def initially_on(self) -> bool:
        return self.initial_status > 0


@dataclass(frozen=True)
class WindSpec:
    """Cut-in / rated / cut-out wind power curve."""

    rated_power: float
    v_cut_in: float
    v_rated: float
    v_cut_out: float

    def __post_init__(self):
        if not 0.0 <= self.v_cut_in < self.v_rated < self.v_cut_out:
            raise InvalidParameterError("need 0 <= v_cut_in < v_rated < v_cut_out")
        if not self.rated_power > 0.0:
            raise InvalidParameterError("rated_power must be positive")


@dataclass(frozen=True)
class SolarSpec:
    """Flat-plate PV array at maximum power point."""

    efficiency: float
    area: float

    def __post_init__(self):
        if not 0.0 < self.efficiency < 1.0:
            raise InvalidParameterError("efficiency must lie in (0, 1)")
        if not self.area > 0.0:
            raise InvalidParameterError("area must be positive")


def ev_soc_step(spec: EvSpec, soc: float, p_charge: float, p_discharge: float, dt: float) -> float:
    """SOC after one at-home slot; bounds are the optimizer's job, not clamped here."""
    if p_charge < 0.0 or p_discharge < 0.0:
        raise InvalidParameterError("charge/discharge powers must be non-negative")
    return soc + spec.eta_c * p_charge * dt / spec.capacity - p_discharge * dt / (
        spec.eta_d * spec.capacity
    )


def ev_apply_trip(spec: EvSpec, soc_at_departure: float, distance: float) -> float:
    """SOC at the return slot after driving ``distance``."""
    if distance < 0.0:
        raise InvalidParameterError("distance must be non-negative")
    soc = soc_at_departure - distance * spec.travel_efficiency / spec.capacity
    if soc < 0.0:
        raise InfeasibleTripError(
            f"trip of {distance} exceeds battery energy (soc would reach {soc:.5f})"
        )
    return soc


def wind_available_power(spec: WindSpec, wind_speed: float) -> float:
    """Piecewise wind curve: zero outside [cut-in, cut-out), linear up to rated."""
    if wind_speed < 0.0:
        raise InvalidParameterError("wind_speed must be non-negative")
    v = wind_speed
    if v < spec.v_cut_in or v >= spec.v_cut_out:
        return 0.0
    if v < spec.v_rated:
        return spec.rated_power * (v - spec.v_cut_in) / (spec.v_rated - spec.v_cut_in)
    return spec.rated_power


def solar_available_power(spec: SolarSpec, irradiance: float, ambient: float) -> float:
    """PV output at maximum power point with the linear temperature derating."""
    if irradiance < 0.0:
        raise InvalidParameterError("irradiance must be non-negative")
    power = spec.efficiency * spec.area * irradiance * (1.0 - 0.005 * (ambient - 25.0))
    return max(power, 0.0)


def battery_energy_step(
    spec: BatterySpec, energy: float, p_charge: float, p_discharge: float, dt: float
) -> float:
    """Stored energy after one slot of (lossy) charging and discharging."""
    if p_charge < 0.0 or p_discharge < 0.0:
        raise InvalidParameterError("charge/discharge powers must be non-negative")
    return energy + spec.eta_c * p_charge * dt - p_discharge * dt / spec.eta_d


def unit_production_cost(unit: ConventionalUnit, committed: int, power: float, dt: float) -> float:
    """Fixed cost plus greedily filled segment cost; zero when uncommitted.

    Greedy in-order filling is exact because marginal costs are
    non-decreasing (enforced by the spec invariant).
    """
    if not committed:
        if abs(power) > 1e-9:
            raise InvalidDispatchError("uncommitted unit must produce zero power")
        return 0.0
    tol = 1e-9 * max(1.0, unit.p_max)
    if power < unit.p_min - tol or power > unit.p_max + tol:
        raise InvalidDispatchError(
            f"power {power} outside [{unit.p_min}, {unit.p_max}] while committed"
        )
    above = min(max(power - unit.p_min, 0.0), unit.p_max - unit.p_min)
    cost = unit.fixed_cost
    for marginal, width in unit.segments:
        fill = min(above, width)
        cost += dt * marginal * fill
        above -= fill
        if above <= 0.0:
            break
    return cost


def validate_unit_schedule(
    unit: ConventionalUnit,
    commitments,
    powers,
    tol: float = 1e-6,
) -> list[str]:
    """Check a commitment/power schedule against every unit constraint.

    Returns one human-readable message per violated constraint; an empty
    list means feasible.  Used as an independent oracle against solver
    output, so it re-derives startup/shutdown indicators from the
    commitment sequence instead of trusting solver variables.

    Conventions: minimum up/down windows are truncated at the horizon
    end; initial_status = +k with min_up > k forces ON for the first
    min_up - k slots (symmetrically for OFF); the ramp check at slot 1 is
    skipped when the unit starts ON because its pre-horizon power is
    unknown (initially-OFF units start from zero power).
    """
    commitments = [int(round(v)) for v in commitments]
    powers = [float(v) for v in powers]
    if len(commitments) != len(powers):
        raise InvalidParameterError("commitments and powers must have equal length")
    nh = len(commitments)
    if any(v not in (0, 1) for v in commitments):
        raise InvalidParameterError("commitments must be binary")

    violations: list[str] = []
    i_prev = 1 if unit.initially_on else 0
    startup = [0] * (nh + 1)
    shutdown = [0] * (nh + 1)
    prev = i_prev
    for t in range(1, nh + 1):
        cur = commitments[t - 1]
        startup[t] = int(cur == 1 and prev == 0)
        shutdown[t] = int(cur == 0 and prev == 1)
        prev = cur

    # generation bounds
    for t in range(1, nh + 1):
        on, p = commitments[t - 1], powers[t - 1]
        if on:
            if p < unit.p_min - tol or p > unit.p_max + tol:
                violations.append(f"slot {t}: power {p:.6g} outside generation bounds")
        elif abs(p) > tol:
            violations.append(f"slot {t}: power {p:.6g} while uncommitted")

    # ramp limits with the startup/shutdown relaxation to p_min
    for t in range(1, nh + 1):
        if t == 1:
            if unit.initially_on:
                continue  # pre-horizon power unknown
            p_prev = 0.0
        else:
            p_prev = powers[t - 2]
        p_cur = powers[t - 1]
        up_lim = unit.p_min if startup[t] else unit.ramp_up
        dn_lim = unit.p_min if shutdown[t] else unit.ramp_down
        if p_cur - p_prev > up_lim + tol:
            violations.append(f"slot {t}: ramp-up {p_cur - p_prev:.6g} exceeds {up_lim:.6g}")
        if p_prev - p_cur > dn_lim + tol:
            violations.append(f"slot {t}: ramp-down {p_prev - p_cur:.6g} exceeds {dn_lim:.6g}")

    # initial-status carry-in
    if unit.initially_on and unit.min_up > unit.initial_status:
        force = min(unit.min_up - unit.initial_status, nh)
        for t in range(1, force + 1):
            if commitments[t - 1] != 1:
                violations.append(f"slot {t}: min-up carry-in requires ON")
    if not unit.initially_on and unit.min_down > -unit.initial_status:
        force = min(unit.min_down + unit.initial_status, nh)
        for t in range(1, force + 1):
            if commitments[t - 1] != 0:
                violations.append(f"slot {t}: min-down carry-in requires OFF")

    # minimum up/down windows, truncated at the horizon
    for t in range(1, nh + 1):
        if startup[t] and unit.min_up > 1:
            for h in range(t, min(t + unit.min_up - 1, nh) + 1):
                if commitments[h - 1] != 1:
                    violations.append(f"slot {t}: min-up violated at slot {h}")
        if shutdown[t] and unit.min_down > 1:
            for h in range(t, min(t + unit.min_down - 1, nh) + 1):
                if commitments[h - 1] != 0:
                    violations.append(f"slot {t}: min-down violated at slot {h}")

    return violations

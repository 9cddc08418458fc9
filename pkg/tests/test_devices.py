import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridsched.devices import (
    BatterySpec,
    ConventionalUnit,
    EvSpec,
    SolarSpec,
    Trip,
    TripPlan,
    WindSpec,
    battery_energy_step,
    ev_apply_trip,
    ev_soc_step,
    solar_available_power,
    unit_production_cost,
    validate_unit_schedule,
    wind_available_power,
)
from gridsched.errors import (
    InfeasibleTripError,
    InvalidDispatchError,
    InvalidParameterError,
)


def leaf_ev(**over):
    base = dict(
        capacity=24.0,
        eta_c=0.9,
        eta_d=0.9,
        p_charge_max=6.0,
        p_discharge_max=6.0,
        soc_min=0.2,
        soc_max=0.9,
        soc_initial=0.5,
        travel_efficiency=0.316,
    )
    base.update(over)
    return EvSpec(**base)


# unit 1 of the three-unit study fixture
UNIT1 = ConventionalUnit(
    p_min=100.0,
    p_max=2000.0,
    segments=((0.13, 1900.0),),
    fixed_cost=30.0,
    startup_cost=150.0,
    shutdown_cost=15.0,
    ramp_up=2000.0,
    ramp_down=2000.0,
    min_up=2,
    min_down=2,
    initial_status=-2,
)

WIND = WindSpec(rated_power=1000.0, v_cut_in=3.0, v_rated=12.0, v_cut_out=30.0)
SOLAR = SolarSpec(efficiency=0.157, area=7000.0)


class TestEv:
    def test_soc_step_charge(self):
        assert ev_soc_step(leaf_ev(), 0.5, 6.0, 0.0, 1.0) == pytest.approx(0.725)

    def test_soc_step_discharge(self):
        expected = 0.725 - 6.0 / (0.9 * 24.0)
        assert ev_soc_step(leaf_ev(), 0.725, 0.0, 6.0, 1.0) == pytest.approx(expected)
        assert expected == pytest.approx(0.44722, abs=1e-5)

    def test_soc_step_idle(self):
        assert ev_soc_step(leaf_ev(), 0.37, 0.0, 0.0, 1.0) == 0.37

    def test_soc_step_negative_power_rejected(self):
        with pytest.raises(InvalidParameterError):
            ev_soc_step(leaf_ev(), 0.5, -1.0, 0.0, 1.0)

    def test_trip_depletion(self):
        assert ev_apply_trip(leaf_ev(), 0.9, 32.0) == pytest.approx(0.9 - 10.112 / 24.0)
        assert ev_apply_trip(leaf_ev(), 0.9, 32.0) == pytest.approx(0.47867, abs=1e-5)

    def test_trip_zero_distance(self):
        assert ev_apply_trip(leaf_ev(), 0.42, 0.0) == 0.42

    def test_trip_infeasible(self):
        with pytest.raises(InfeasibleTripError):
            ev_apply_trip(leaf_ev(), 0.2, 32.0)

    @settings(max_examples=50, deadline=None)
    @given(
        soc=st.floats(0.0, 1.0),
        p1=st.floats(0.0, 6.0),
        p2=st.floats(0.0, 6.0),
    )
    def test_soc_step_affine_consistency(self, soc, p1, p2):
        ev = leaf_ev()
        joint = ev_soc_step(ev, soc, p1 + p2, 0.0, 1.0)
        seq = ev_soc_step(ev, ev_soc_step(ev, soc, p1, 0.0, 0.5), p2, 0.0, 0.5)
        # half-slot of p1 then half-slot of p2 moves half the energy of each
        expected_seq = soc + 0.9 * (p1 + p2) * 0.5 / 24.0
        assert seq == pytest.approx(expected_seq, abs=1e-12)
        assert joint == pytest.approx(soc + 0.9 * (p1 + p2) / 24.0, abs=1e-12)

    def test_invariants_enforced(self):
        with pytest.raises(InvalidParameterError):
            leaf_ev(soc_min=0.9, soc_max=0.2)
        with pytest.raises(InvalidParameterError):
            leaf_ev(soc_initial=0.95)
        with pytest.raises(InvalidParameterError):
            leaf_ev(eta_c=1.2)


class TestTripPlan:
    def test_availability_flags(self):
        plan = TripPlan(trips=(Trip(depart_slot=9, return_slot=18, distance=32.0),))
        avail = plan.availability(24)
        assert avail[7] == 1  # slot 8: home
        assert avail[8] == 0  # slot 9: departs
        assert avail[16] == 0  # slot 17: still away
        assert avail[17] == 1  # slot 18: returns
        assert avail.sum() == 24 - 9

    def test_overlapping_trips_rejected(self):
        with pytest.raises(InvalidParameterError):
            TripPlan(trips=(Trip(2, 8, 10.0), Trip(6, 12, 10.0)))

    def test_backwards_trip_rejected(self):
        with pytest.raises(InvalidParameterError):
            Trip(depart_slot=8, return_slot=8, distance=1.0)


class TestWind:
    def test_curve_fixture_values(self):
        assert wind_available_power(WIND, 2.0) == 0.0
        assert wind_available_power(WIND, 7.5) == pytest.approx(500.0, abs=1e-9)
        assert wind_available_power(WIND, 20.0) == pytest.approx(1000.0, abs=1e-9)
        assert wind_available_power(WIND, 31.0) == 0.0

    def test_boundaries(self):
        assert wind_available_power(WIND, 3.0) == 0.0  # cut-in exactly: ramp starts at 0
        assert wind_available_power(WIND, 12.0) == pytest.approx(1000.0)
        assert wind_available_power(WIND, 30.0) == 0.0  # at cut-out the turbine stops

    @settings(max_examples=60, deadline=None)
    @given(v=st.floats(0.0, 12.0), dv=st.floats(0.0, 2.0))
    def test_nondecreasing_below_rated(self, v, dv):
        hi = min(v + dv, 12.0)
        assert wind_available_power(WIND, v) <= wind_available_power(WIND, hi) + 1e-12

    def test_continuity_near_rated(self):
        eps = 1e-9
        below = wind_available_power(WIND, 12.0 - eps)
        at = wind_available_power(WIND, 12.0)
        assert abs(below - at) < 1e-5


class TestSolar:
    def test_rated_output_near_1100(self):
        rated = solar_available_power(SOLAR, 1.0, 25.0)
        assert rated == pytest.approx(1099.0, abs=1e-9)
        assert abs(rated - 1100.0) / 1100.0 < 0.002  # datasheet rounding

    def test_zero_irradiance(self):
        assert solar_available_power(SOLAR, 0.0, 25.0) == 0.0

    def test_temperature_derating(self):
        assert solar_available_power(SOLAR, 1.0, 35.0) == pytest.approx(1099.0 * 0.95)

    def test_clamped_at_zero(self):
        assert solar_available_power(SOLAR, 1.0, 300.0) == 0.0


class TestBattery:
    def test_energy_step(self):
        spec = BatterySpec(
            capacity=200.0, e_min=40.0, e_max=180.0, p_charge_max=100.0,
            p_discharge_max=100.0, e_initial=100.0,
        )
        assert spec.eta_c == 0.95  # documented package default
        assert battery_energy_step(spec, 100.0, 100.0, 0.0, 1.0) == pytest.approx(195.0)
        assert battery_energy_step(spec, 77.0, 0.0, 0.0, 1.0) == 77.0

    def test_round_trip_loses_energy(self):
        spec = BatterySpec(
            capacity=200.0, e_min=0.0, e_max=200.0, p_charge_max=100.0,
            p_discharge_max=100.0, eta_c=0.9, eta_d=0.9, e_initial=100.0,
        )
        up = battery_energy_step(spec, 100.0, 50.0, 0.0, 1.0)
        # discharge just enough power to export what charging absorbed
        down = battery_energy_step(spec, up, 0.0, 50.0, 1.0)
        assert down < 100.0

    def test_ordering_invariants(self):
        with pytest.raises(InvalidParameterError):
            BatterySpec(capacity=100.0, e_min=50.0, e_max=40.0, p_charge_max=10.0,
                        p_discharge_max=10.0, e_initial=45.0)


class TestUnitCost:
    def test_table_fixture_cost(self):
        assert unit_production_cost(UNIT1, 1, 2000.0, 1.0) == pytest.approx(277.0, abs=1e-9)

    def test_cost_at_pmin_is_fixed_cost(self):
        assert unit_production_cost(UNIT1, 1, 100.0, 1.0) == pytest.approx(30.0)

    def test_uncommitted_is_free(self):
        assert unit_production_cost(UNIT1, 0, 0.0, 1.0) == 0.0

    def test_out_of_bounds_dispatch_rejected(self):
        with pytest.raises(InvalidDispatchError):
            unit_production_cost(UNIT1, 1, 50.0, 1.0)
        with pytest.raises(InvalidDispatchError):
            unit_production_cost(UNIT1, 0, 10.0, 1.0)

    def test_nonconvex_segments_rejected(self):
        with pytest.raises(InvalidParameterError):
            ConventionalUnit(
                p_min=10.0, p_max=30.0, segments=((0.5, 10.0), (0.3, 10.0)),
                fixed_cost=1.0, startup_cost=1.0, shutdown_cost=0.1,
                ramp_up=30.0, ramp_down=30.0, min_up=0, min_down=0, initial_status=-1,
            )

    def test_convex_nondecreasing_on_random_units(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            p_min = rng.uniform(5.0, 50.0)
            widths = rng.uniform(1.0, 50.0, size=rng.integers(1, 5))
            costs = np.sort(rng.uniform(0.01, 1.0, size=len(widths)))
            unit = ConventionalUnit(
                p_min=p_min, p_max=p_min + widths.sum(),
                segments=tuple(zip(costs, widths)),
                fixed_cost=rng.uniform(0.0, 100.0), startup_cost=1.0, shutdown_cost=0.1,
                ramp_up=1e4, ramp_down=1e4, min_up=0, min_down=0, initial_status=-1,
            )
            ps = np.linspace(unit.p_min, unit.p_max, 9)
            vals = [unit_production_cost(unit, 1, p, 1.0) for p in ps]
            assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))
            # convexity: midpoint below chord
            for i in range(len(ps) - 2):
                mid = unit_production_cost(unit, 1, (ps[i] + ps[i + 2]) / 2, 1.0)
                assert mid <= (vals[i] + vals[i + 2]) / 2 + 1e-9


class TestValidateSchedule:
    def test_all_off_feasible(self):
        assert validate_unit_schedule(UNIT1, [0, 0, 0, 0], [0, 0, 0, 0]) == []

    def test_min_up_violation(self):
        unit = UNIT1
        out = validate_unit_schedule(unit, [1, 0, 0], [100.0, 0.0, 0.0])
        assert any("min-up" in v for v in out)

    def test_ramp_violation(self):
        unit = ConventionalUnit(
            p_min=100.0, p_max=2000.0, segments=((0.13, 1900.0),),
            fixed_cost=30.0, startup_cost=150.0, shutdown_cost=15.0,
            ramp_up=500.0, ramp_down=500.0, min_up=0, min_down=0, initial_status=-1,
        )
        out = validate_unit_schedule(unit, [1, 1], [100.0, 2000.0])
        assert any("ramp-up" in v for v in out)

    def test_startup_relaxes_to_pmin(self):
        # starting unit may jump from 0 to exactly p_min
        out = validate_unit_schedule(UNIT1, [1, 1], [100.0, 1000.0])
        assert out == []
        out = validate_unit_schedule(UNIT1, [1, 1], [500.0, 600.0])
        assert any("ramp-up" in v for v in out)  # startup above p_min

    def test_carry_in_on(self):
        unit = ConventionalUnit(
            p_min=100.0, p_max=2000.0, segments=((0.13, 1900.0),),
            fixed_cost=30.0, startup_cost=150.0, shutdown_cost=15.0,
            ramp_up=2000.0, ramp_down=2000.0, min_up=3, min_down=0, initial_status=1,
        )
        # ON for 1 hour already with min_up 3: must stay ON slots 1..2
        out = validate_unit_schedule(unit, [1, 0, 0], [100.0, 0.0, 0.0])
        assert any("carry-in" in v for v in out)
        assert validate_unit_schedule(unit, [1, 1, 0], [200.0, 100.0, 0.0]) == []

    def test_carry_in_off(self):
        unit = ConventionalUnit(
            p_min=100.0, p_max=2000.0, segments=((0.13, 1900.0),),
            fixed_cost=30.0, startup_cost=150.0, shutdown_cost=15.0,
            ramp_up=2000.0, ramp_down=2000.0, min_up=0, min_down=3, initial_status=-1,
        )
        out = validate_unit_schedule(unit, [1, 1, 1], [100.0, 100.0, 100.0])
        assert any("carry-in" in v for v in out)

    def test_horizon_truncation(self):
        # startup at the last slot only forces ON through the horizon end
        assert validate_unit_schedule(UNIT1, [0, 0, 1], [0.0, 0.0, 100.0]) == []

    def test_length_mismatch(self):
        with pytest.raises(InvalidParameterError):
            validate_unit_schedule(UNIT1, [0, 1], [0.0])

    def test_shutdown_requires_pmin_landing(self):
        unit = ConventionalUnit(
            p_min=100.0, p_max=2000.0, segments=((0.13, 1900.0),),
            fixed_cost=30.0, startup_cost=150.0, shutdown_cost=15.0,
            ramp_up=2000.0, ramp_down=300.0, min_up=0, min_down=0, initial_status=-1,
        )
        # shutting down from 800 exceeds the p_min shutdown allowance
        out = validate_unit_schedule(unit, [1, 1, 0], [100.0, 800.0, 0.0])
        assert any("ramp-down" in v for v in out)
        assert validate_unit_schedule(unit, [1, 1, 0], [100.0, 100.0, 0.0]) == []

import copy
import math

import pytest

from lifiloc.calibration import (
    DEFAULT_FALLBACK_N,
    CalibrationState,
    LiFiTrigger,
    current_params,
    on_lifi_trigger,
)
from lifiloc.exceptions import CalibrationError
from lifiloc.model import RssiSample, RssiSnapshot, load_floorplan
from lifiloc.propagation import EnvironmentField, sample_environment


@pytest.fixture
def corridor_plan():
    return load_floorplan(
        {
            "access_points": [
                {"id": "west", "x": 0.0, "y": 7.0, "p0": 26.0, "d0": 1.0},
                {"id": "south", "x": 12.0, "y": 0.0, "p0": 25.0},
                {"id": "east", "x": 20.0, "y": 14.0, "p0": 27.0},
                {"id": "near", "x": 12.0, "y": 8.0, "p0": 24.0},
            ],
            "lamps": [
                {"id": "lamp", "x": 12.0, "y": 7.0, "coverage_radius": 1.5},
                {"id": "other", "x": 3.0, "y": 3.0},
            ],
            "bounds": {"min_x": 0.0, "min_y": 0.0, "max_x": 20.0, "max_y": 14.0},
        }
    )


def snap(t, **readings):
    return RssiSnapshot(t, tuple(RssiSample(k, v) for k, v in readings.items()))


def test_single_ap_hand_evaluation(corridor_plan):
    state = on_lifi_trigger(
        CalibrationState(), LiFiTrigger(5.0, "lamp"), corridor_plan, snap(5.0, west=18.5)
    )
    assert state.per_ap_n["west"] == pytest.approx(0.3018, abs=1e-4)
    assert state.per_ap_n["west"] == pytest.approx(7.5 / (10 * math.log(12)), abs=1e-15)
    assert state.last_trigger == LiFiTrigger(5.0, "lamp")


def test_current_params_after_trigger(corridor_plan):
    state = on_lifi_trigger(
        CalibrationState(fallback_n=0.31), LiFiTrigger(5.0, "lamp"), corridor_plan, snap(5.0, west=18.5)
    )
    west = corridor_plan.access_point("west")
    params = current_params(state, west)
    assert (params.p0, params.d0) == (26.0, 1.0)
    assert params.n == pytest.approx(0.3018, abs=1e-4)
    # never sampled -> fallback
    assert current_params(state, corridor_plan.access_point("east")).n == 0.31


def test_fresh_state_uses_fallback(corridor_plan):
    state = CalibrationState(fallback_n=0.31)
    assert all(current_params(state, ap).n == 0.31 for ap in corridor_plan.access_points)
    assert not state.is_calibrated
    assert CalibrationState().fallback_n == DEFAULT_FALLBACK_N == pytest.approx(
        sum([0.3338, 0.2337, 0.3004, 0.4006, 0.3004]) / 5, abs=1e-5
    )


def test_reference_distance_guard_keeps_previous(corridor_plan):
    # "near" sits exactly d0 = 1 m from the lamp center
    before = CalibrationState(per_ap_n={"near": 0.27}, last_trigger=LiFiTrigger(0.0, "other"))
    after = on_lifi_trigger(before, LiFiTrigger(5.0, "lamp"), corridor_plan, snap(5.0, near=10.0, west=18.5))
    assert after.per_ap_n["near"] == 0.27
    assert "west" in after.per_ap_n


def test_absent_aps_retain_previous(corridor_plan):
    s1 = on_lifi_trigger(CalibrationState(), LiFiTrigger(1.0, "lamp"), corridor_plan, snap(1.0, west=18.5, south=17.0))
    s2 = on_lifi_trigger(s1, LiFiTrigger(9.0, "lamp"), corridor_plan, snap(9.0, west=19.0))
    assert s2.per_ap_n["south"] == s1.per_ap_n["south"]
    assert s2.per_ap_n["west"] != s1.per_ap_n["west"]
    assert s2.last_trigger.timestamp == 9.0


def test_noiseless_field_recovers_exponent(corridor_plan):
    field = EnvironmentField(default_n=0.25)
    lamp = corridor_plan.lamp("lamp")
    samples = tuple(sample_environment(field, ap, lamp.position) for ap in corridor_plan.access_points)
    state = on_lifi_trigger(CalibrationState(), LiFiTrigger(0.0, "lamp"), corridor_plan, RssiSnapshot(0.0, samples))
    triggered = {"west", "south", "east"}
    assert set(state.per_ap_n) == triggered
    for ap_id in triggered:
        assert state.per_ap_n[ap_id] == pytest.approx(0.25, abs=1e-9)


def test_errors(corridor_plan):
    with pytest.raises(CalibrationError, match="unknown lamp"):
        on_lifi_trigger(CalibrationState(), LiFiTrigger(0.0, "nope"), corridor_plan, snap(0.0, west=18.5))
    with pytest.raises(CalibrationError, match="stale"):
        on_lifi_trigger(CalibrationState(), LiFiTrigger(0.0, "lamp"), corridor_plan, snap(1.5, west=18.5))
    # exactly at the window edge is accepted
    on_lifi_trigger(CalibrationState(), LiFiTrigger(0.0, "lamp"), corridor_plan, snap(1.0, west=18.5))


def test_clamped_exponents_are_flagged(corridor_plan):
    state = on_lifi_trigger(CalibrationState(), LiFiTrigger(0.0, "lamp"), corridor_plan, snap(0.0, west=30.0))
    assert state.per_ap_n["west"] == 0.05
    assert state.clamped == frozenset({"west"})
    state = on_lifi_trigger(state, LiFiTrigger(2.0, "lamp"), corridor_plan, snap(2.0, west=18.5))
    assert state.clamped == frozenset()


def test_transitions_are_pure_and_idempotent(corridor_plan):
    s0 = CalibrationState(per_ap_n={"east": 0.4}, last_trigger=LiFiTrigger(0.0, "other"))
    frozen = copy.deepcopy(s0)
    trig, sn = LiFiTrigger(3.0, "lamp"), snap(3.0, west=18.5, east=15.0)
    s1 = on_lifi_trigger(s0, trig, corridor_plan, sn)
    assert s0 == frozen
    assert on_lifi_trigger(s1, trig, corridor_plan, sn) == s1
    assert on_lifi_trigger(s0, trig, corridor_plan, sn) == s1


def test_hold_between_triggers(corridor_plan):
    from lifiloc.trilateration import locate

    state = on_lifi_trigger(
        CalibrationState(), LiFiTrigger(0.0, "lamp"), corridor_plan, snap(0.0, west=18.5, south=17.0, east=16.0)
    )
    frozen = copy.deepcopy(state)
    params = [current_params(state, ap) for ap in corridor_plan.access_points]
    for t in range(1, 20):
        locate(snap(float(t), west=18.0 + t * 0.05, south=17.0, east=16.0), state, corridor_plan)
    assert state == frozen
    assert [current_params(state, ap) for ap in corridor_plan.access_points] == params


def test_state_invariant():
    with pytest.raises(ValueError):
        CalibrationState(per_ap_n={"a": 0.3})

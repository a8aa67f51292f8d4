import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfequiv.errors import InputDomainError, SingularVoltageError
from wfequiv.wtg_control import (
    CurrentState, TurbineParams, id_max, id_ref, iq_ref, power_curve, power_curve_inverse, step_current,
)

P = TurbineParams()
volts = st.floats(0.0, 1.2, allow_nan=False)
currents = st.floats(0.0, 1.1, allow_nan=False)


def test_power_curve_points():
    assert power_curve(2.0, P) == 0.0
    assert power_curve(11.1, P) == 1.0
    assert power_curve(8.81, P) == pytest.approx((8.81 / 11.1) ** 3, abs=1e-12)
    assert power_curve(8.81, P) == pytest.approx(0.5, abs=2e-4)
    assert power_curve(15.0, P) == 1.0
    np.testing.assert_allclose(power_curve([2.0, 11.1], P), [0.0, 1.0])


def test_power_curve_rejects_negative_speed():
    with pytest.raises(InputDomainError):
        power_curve(-1.0, P)


def test_power_curve_inverse_points():
    assert power_curve_inverse(1.0, P) == pytest.approx(11.1)
    assert power_curve_inverse(0.5, P) == pytest.approx(11.1 * 0.5 ** (1 / 3), abs=1e-12)
    for bad in (0.0, -0.1, 1.01):
        with pytest.raises(InputDomainError):
            power_curve_inverse(bad, P)
    v, flag = power_curve_inverse(1e-4, P, return_flag=True)
    assert v == P.v_cutin and flag


@given(st.floats(3.5, 11.1))
def test_power_curve_round_trip(v):
    assert power_curve_inverse(power_curve(v, P), P) == pytest.approx(v, rel=1e-12)


def test_iq_ref_points():
    assert iq_ref(0.9, P) == 0.0
    assert iq_ref(0.5, P) == pytest.approx(0.6)
    assert iq_ref(0.1, P) == pytest.approx(1.05)
    assert iq_ref(1.0, P) == 0.0


def test_iq_ref_capped_at_i_max():
    p = TurbineParams(i_max=1.0)
    assert iq_ref(0.1, p) == 1.0
    assert id_max(0.1, p) == 0.0


def test_id_max_points():
    assert id_max(0.9, P) == pytest.approx(1.1)
    assert id_max(0.5, P) == pytest.approx(math.sqrt(1.21 - 0.36))
    assert id_max(0.5, P) == pytest.approx(0.9220, abs=1e-4)


def test_id_ref_points():
    assert id_ref(CurrentState(0.5, 0, 0.5, 1.0), 0.5, P) == pytest.approx(id_max(0.5, P))
    assert id_ref(CurrentState(0.3, 0, 0.3, 1.0), 0.6, P) == pytest.approx(0.5)
    assert id_ref(CurrentState(0.7, 0, 0.7, 1.0), 1.0, P) == pytest.approx(0.7)
    # above the band the pre-fault power is tracked
    assert id_ref(CurrentState(0.7, 0, 0.7, 0.98), 0.95, P) == pytest.approx(0.7 * 0.98 / 0.95)


def test_id_ref_singular_and_floored():
    with pytest.raises(SingularVoltageError):
        id_ref(CurrentState.steady(0.5), 0.0, P)
    s = CurrentState.steady(0.5)
    assert id_ref(s, 1e-6, P) == id_ref(s, 0.01, P)


def test_step_current_examples():
    s = step_current(CurrentState(0.5, 0.0, 1.0, 1.0), 1.0, 0.01, P)
    assert s.i_d == pytest.approx(0.505)
    s = step_current(CurrentState(1.0, 0.0, 0.8, 1.0), 1.0, 0.01, P)
    assert s.i_d == pytest.approx(0.8)
    # during a fault the active current jumps straight to its reference
    s = step_current(CurrentState(0.5, 0.0, 0.5, 1.0), 0.5, 1e-3, P)
    assert s.i_d == pytest.approx(min(0.5 / 0.5, id_max(0.5, P)))
    assert s.i_q == pytest.approx(0.6)


def test_step_current_rate_override():
    s = step_current(CurrentState(0.5, 0.0, 1.0, 1.0), 1.0, 0.01, P, rate=0.1)
    assert s.i_d == pytest.approx(0.501)


def test_params_invariants():
    with pytest.raises(InputDomainError):
        TurbineParams(i_max=0.9)
    with pytest.raises(InputDomainError):
        TurbineParams(v_cutin=12.0)


@given(i_d=currents, i_d0=currents, u=volts, dt=st.floats(1e-4, 0.1), e0=st.floats(0.8, 1.1))
def test_current_circle(i_d, i_d0, u, dt, e0):
    s = step_current(CurrentState(i_d, 0.0, i_d0, e0), u, dt, P)
    assert s.i_d**2 + s.i_q**2 <= P.i_max**2 + 1e-9
    assert s.i_d >= 0


@given(i_d=currents, i_d0=currents, u=st.floats(0.0, 0.9, exclude_max=True), dt=st.floats(1e-4, 0.1))
def test_reactive_priority(i_d, i_d0, u, dt):
    s = step_current(CurrentState(i_d, 0.0, i_d0, 1.0), u, dt, P)
    q = iq_ref(u, P)
    if q < P.i_max:
        assert s.i_q == q


@settings(max_examples=50)
@given(
    i_d0=currents,
    i_start=currents,
    us=st.lists(st.floats(0.9, 1.2, exclude_min=True), min_size=2, max_size=40),
    dt=st.floats(1e-3, 0.05),
)
def test_slew_limit_above_band(i_d0, i_start, us, dt):
    s = CurrentState(i_start, 0.0, i_d0, 1.0)
    traj = [s.i_d]
    for u in us:
        s = step_current(s, u, dt, P)
        traj.append(s.i_d)
    traj = np.array(traj)
    for a in range(len(traj)):
        for b in range(a + 1, len(traj)):
            assert traj[b] - traj[a] <= P.k_ramp * (b - a) * dt + 1e-9


@given(p0=st.floats(0.0, 1.0), e0=st.floats(0.92, 1.1), dt=st.floats(1e-4, 0.1))
def test_prefault_fixed_point(p0, e0, dt):
    s = CurrentState.steady(p0, e0)
    s2 = step_current(s, e0, dt, P)
    assert s2.i_d == pytest.approx(s.i_d, abs=1e-15)
    assert s2.i_q == 0.0

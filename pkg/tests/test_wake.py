import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wfequiv.errors import InputDomainError
from wfequiv.wake import WakeParams, deficit_factor, draw_inflow, farm_speeds, feeder_speeds


def _oracle(ct, k, radius, x):
    return 1 - (1 - math.sqrt(1 - ct)) * (radius / (radius + k * x)) ** 2


def test_deficit_factor_reference_value():
    ref = _oracle(0.2, 0.04, 40, 500)
    assert ref == pytest.approx(0.95308, abs=1e-5)
    assert deficit_factor(WakeParams(0.2, 0.04, 40, 500)) == pytest.approx(ref, abs=1e-15)


def test_deficit_limits():
    assert deficit_factor(WakeParams(c_t=1e-12)) == pytest.approx(1.0, abs=1e-12)
    assert deficit_factor(WakeParams(spacing=1e12)) == pytest.approx(1.0, abs=1e-12)


def test_feeder_speeds_example():
    dec = deficit_factor(WakeParams())
    v = feeder_speeds(10.0, 3, WakeParams())
    assert v == pytest.approx([10.0, 10 * dec, 10 * dec**2])
    assert v == pytest.approx([10.0, 9.5308, 9.0836], abs=1e-3)
    assert feeder_speeds(9.3, 1, WakeParams()) == [9.3]


@given(st.floats(0.01, 0.99), st.floats(1e-3, 0.2), st.floats(1, 100), st.floats(10, 2000),
       st.floats(0.0, 25.0), st.integers(2, 20))
def test_geometric_decay(ct, k, radius, x, v0, n):
    p = WakeParams(ct, k, radius, x)
    v = feeder_speeds(v0, n, p)
    dec = deficit_factor(p)
    assert 0 < dec < 1
    for a, b in zip(v, v[1:]):
        assert b == pytest.approx(a * dec, rel=1e-14, abs=1e-300)


@given(st.integers(0, 2**31), st.integers(1, 10), st.integers(1, 10))
def test_feeder_draws_independent(seed, n, extra):
    a = draw_inflow(seed, n)
    b = draw_inflow(seed, n + extra)
    assert a == b[:n]
    assert all(9.0 <= v <= 11.0 for v in b)


def test_farm_speeds_concatenates():
    p = WakeParams()
    out = farm_speeds([10.0, 9.0], [2, 3], p)
    assert out == feeder_speeds(10.0, 2, p) + feeder_speeds(9.0, 3, p)


def test_wake_invariants():
    for kw in ({"c_t": 1.0}, {"c_t": 0.0}, {"k_decay": 0}, {"rotor_radius": -1}, {"spacing": 0}):
        with pytest.raises(InputDomainError):
            WakeParams(**kw)
    with pytest.raises(InputDomainError):
        feeder_speeds(10.0, 0, WakeParams())

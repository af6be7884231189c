import math

import pytest
from hypothesis import given, strategies as st

from polyplant import (BRINE, WATER, InvalidInputError, check_switch,
                       circuit_mass_flow, temp_after_heat)


def test_switch_accepts_exact_binary():
    assert check_switch(0) == 0
    assert check_switch(1) == 1
    assert check_switch(1.0) == 1


@pytest.mark.parametrize("bad", [-1, 2, 0.5, float("nan"), "on"])
def test_switch_rejects_everything_else(bad):
    with pytest.raises(InvalidInputError):
        check_switch(bad)


def test_mass_flow_water():
    # 1.3 m3/h of water -> 0.3611 kg/s
    assert math.isclose(circuit_mass_flow(1, 1.3, WATER), 1.3 * 1000.0 / 3600.0)


def test_mass_flow_brine():
    assert math.isclose(circuit_mass_flow(1, 4.7, BRINE), 4.7 * 1040.0 / 3600.0)


def test_mass_flow_gated_by_switch():
    assert circuit_mass_flow(0, 1.3, WATER) == 0.0


def test_mass_flow_zero_flow_is_inert_negative_rejected():
    assert circuit_mass_flow(1, 0.0, WATER) == 0.0
    with pytest.raises(InvalidInputError):
        circuit_mass_flow(0, -1.0, WATER)


def test_feed_temp_heating_oracle():
    t = temp_after_heat(43.0, 10200.0, 0.8, WATER, +1)
    assert math.isclose(t, 43.0 + 10200.0 / ((1000.0 / 3600.0) * 0.8 * 4186.0))
    assert math.isclose(t, 53.965121834687054)


def test_feed_temp_cooling_oracle():
    t = temp_after_heat(60.3, 12300.0, 1.3, WATER, -1)
    assert math.isclose(t, 52.162986511815944)


@given(t_rl=st.floats(-20, 95), p=st.floats(0, 5e4),
       v=st.floats(0.05, 10.0))
def test_feed_temp_directions_are_mirror_images(t_rl, p, v):
    up = temp_after_heat(t_rl, p, v, WATER, +1)
    down = temp_after_heat(t_rl, p, v, WATER, -1)
    assert math.isclose(up - t_rl, t_rl - down, abs_tol=1e-9)
    assert up >= t_rl >= down


def test_feed_temp_uses_volume_flow_not_gated_flow():
    # the temperature rise is defined by the circulating volume flow even
    # when a switch elsewhere zeroes the transported mass flow
    t = temp_after_heat(40.0, 5000.0, 1.0, WATER, +1)
    assert t > 40.0

"""Dry cooling tower (outdoor coil, OC) with speed-controlled fans.

The fan bank follows the affinity laws: speed scales linearly with the
0..10 V control signal, air mass flow scales with speed and electric draw
with its cube.  Heat exchange between the brine loop and ambient air uses
the effectiveness-NTU method for the printed counter-flow relation, with
the exact limits at capacity ratio one and zero.

Sign convention: positive thermal power means heat leaves the brine
(rejection).  With brine colder than ambient the same equations yield a
negative power, i.e. the coil harvests heat from the air, which is exactly
how the unit serves as the source for the heat pump in winter.
"""

import math
from dataclasses import dataclass

from .core import AIR, BRINE, FluidProps, check_switch, circuit_mass_flow
from .errors import InvalidInputError


@dataclass(frozen=True)
class OcParams:
    ua: float            # overall transfer coefficient x area, W/K
    rpm_max: float       # fan speed at full signal, 1/min
    p_el_max: float      # W at full speed
    m_air_max: float     # kg/s at full speed
    v_max: float = 10.0  # control signal ceiling, V
    fluid: FluidProps = BRINE  # liquid side of the coil
    c_p_air: float = AIR.c_p   # J/(kg K)

    def __post_init__(self):
        if min(self.ua, self.rpm_max, self.p_el_max, self.v_max, self.m_air_max) <= 0.0:
            raise InvalidInputError("all OC parameters must be positive")


@dataclass(frozen=True)
class FanState:
    rpm: float
    m_air: float  # kg/s
    p_el: float   # W


@dataclass(frozen=True)
class OcResult:
    t_rl: float       # brine return from the plant, degC
    t_fl: float       # brine feed back to the plant, degC
    t_air_out: float  # degC
    p_th: float       # W, positive = heat rejected to air
    p_el: float       # W
    m_dot: float      # kg/s brine
    m_air: float      # kg/s
    rpm: float


def fan_state(p: OcParams, v_set: float, switch) -> FanState:
    """Fan bank state for a control signal; electric draw is switch-gated."""
    check_switch(switch)
    if not (0.0 <= v_set <= p.v_max):
        raise InvalidInputError(f"control signal must be in [0, {p.v_max}] V, got {v_set}")
    rpm = p.rpm_max * v_set / p.v_max
    m_air = rpm * p.m_air_max / p.rpm_max
    p_el = switch * (rpm / p.rpm_max) ** 3 * p.p_el_max
    return FanState(rpm=rpm, m_air=m_air, p_el=p_el)


def ntu_effectiveness(c_min: float, c_max: float, ua: float) -> float:
    """Counter-flow effectiveness for given capacity rates and UA value."""
    if not (0.0 < c_min <= c_max):
        raise InvalidInputError(f"need 0 < c_min <= c_max, got {c_min}, {c_max}")
    if ua < 0.0:
        raise InvalidInputError(f"UA must be >= 0, got {ua}")
    ntu = ua / c_min
    c_r = c_min / c_max
    if c_r < 1e-9:
        return 1.0 - math.exp(-ntu)
    if abs(1.0 - c_r) < 1e-9:
        return ntu / (1.0 + ntu)
    e = math.exp(-ntu * (1.0 - c_r))
    return (1.0 - e) / (1.0 - c_r * e)


def oc_step(p: OcParams, t_rl: float, t_amb: float, v_dot: float,
            v_set: float, switch) -> OcResult:
    """Brine-side state of the cooler for one evaluation instant.

    Switched off (or at zero fan signal) the coil is thermally inert: the
    brine passes through unchanged and no air is moved.
    """
    fan = fan_state(p, v_set, switch)
    m_dot = circuit_mass_flow(switch, v_dot, p.fluid)
    if switch == 0 or fan.m_air == 0.0 or v_dot == 0.0:
        return OcResult(
            t_rl=t_rl, t_fl=t_rl, t_air_out=t_amb,
            p_th=0.0, p_el=fan.p_el, m_dot=m_dot,
            m_air=fan.m_air, rpm=fan.rpm,
        )
    c_h = (p.fluid.rho / 3600.0) * v_dot * p.fluid.c_p
    c_c = fan.m_air * p.c_p_air
    c_min, c_max = min(c_h, c_c), max(c_h, c_c)
    eps = ntu_effectiveness(c_min, c_max, p.ua)
    p_th = eps * c_min * (t_rl - t_amb)
    return OcResult(
        t_rl=t_rl,
        t_fl=t_rl - p_th / c_h,
        t_air_out=t_amb + p_th / c_c,
        p_th=p_th,
        p_el=fan.p_el,
        m_dot=m_dot,
        m_air=fan.m_air,
        rpm=fan.rpm,
    )

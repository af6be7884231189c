"""Shared fluid properties and circuit-level helpers.

Unit conventions, used consistently by every module:

* temperature            degC
* thermal/electric power W
* volume flow            m3/h  (pump curves and plant schematics use m3/h)
* mass flow              kg/s
* time                   s

Only temperature differences enter the balance equations, so degC is safe
throughout and no Kelvin conversion happens anywhere.
"""

from dataclasses import dataclass

from .errors import InvalidInputError

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class FluidProps:
    """Constant density and specific heat capacity of a working fluid."""

    rho: float  # kg/m3
    c_p: float  # J/(kg K)

    def __post_init__(self):
        if not (self.rho > 0.0 and self.c_p > 0.0):
            raise InvalidInputError(
                f"fluid properties must be positive, got rho={self.rho}, c_p={self.c_p}"
            )


WATER = FluidProps(rho=1000.0, c_p=4186.0)
#: 34% glycol-water mixture used in the outdoor (heat rejection) loop.
BRINE = FluidProps(rho=1040.0, c_p=3600.0)
#: Density is only a placeholder; air never enters a pumped circuit.
AIR = FluidProps(rho=1.2, c_p=1006.0)


@dataclass(frozen=True)
class CircuitResult:
    """Feed and return conditions of one hydraulic circuit of a machine."""

    t_rl: float   # return-line temperature entering the machine, degC
    t_fl: float   # feed-line temperature leaving the machine, degC
    v_dot: float  # nominal circuit volume flow, m3/h
    m_dot: float  # switch-gated mass flow, kg/s
    p_th: float   # thermal power transferred in this circuit, W


def check_switch(switch) -> int:
    """Validate a binary on/off switch value."""
    if switch not in (0, 1):
        raise InvalidInputError(f"switch must be 0 or 1, got {switch!r}")
    return int(switch)


def circuit_mass_flow(switch, v_dot: float, fluid: FluidProps) -> float:
    """Mass flow of a circuit, gated by the owning machine's switch.

    The pumps run at constant speed whenever the machine is on, so the mass
    flow is the nominal volume flow converted to kg/s, or exactly zero when
    the machine is off.
    """
    check_switch(switch)
    if v_dot < 0.0:
        raise InvalidInputError(f"volume flow must be >= 0 m3/h, got {v_dot}")
    return switch * v_dot * fluid.rho / SECONDS_PER_HOUR


def temp_after_heat(t_rl: float, p_th: float, v_dot: float,
                    fluid: FluidProps, direction: int) -> float:
    """Feed-line temperature after a thermal power is added to or removed
    from a circulating circuit.

    direction +1 warms the stream, -1 cools it.  The divisor uses the volume
    flow directly, never the switch-gated mass flow, so a machine that is
    switched off does not divide by zero.
    """
    if direction not in (1, -1):
        raise InvalidInputError(f"direction must be +1 or -1, got {direction!r}")
    if v_dot <= 0.0:
        raise InvalidInputError(
            f"feed-line temperature needs a positive volume flow, got {v_dot} m3/h"
        )
    c_flow = (fluid.rho / SECONDS_PER_HOUR) * v_dot * fluid.c_p  # W/K
    return t_rl + direction * p_th / c_flow

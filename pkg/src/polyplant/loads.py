"""Thermal loads drawing on the storage tanks.

A load circuit is an HVAC distribution loop with constant circulation flow
whose feed temperature is held at a set value by an ideal three-way mixing
valve.  The valve blends water drawn from the tank with recirculated loop
water; the draw needed to hold the set temperature against a demanded
emitter power follows from the mixing balance:

    m_dot_tank = P * m_dot_hvac / (m_dot_hvac * c_p * dT + P)

with dT the (positive) gap between tank supply and feed set temperature.
The draw never exceeds the circulation flow and reaches it only in the
limit dT -> 0.

The surplus loop water displaced by the draw runs back to the tank at the
emitter outlet temperature, feed set -/+ P/(m_dot_hvac*c_p) for heating
resp. cooling.  With that return temperature the enthalpy the tank hands
to the circuit equals the demanded power exactly, which the plant-level
energy audit relies on.  A constant override for the tank-side return is
available for sensitivity studies; it breaks exact closure.
"""

from dataclasses import dataclass
from typing import Optional

from .core import WATER, FluidProps
from .errors import InsufficientTankTemperatureError, InvalidInputError


@dataclass(frozen=True)
class LoadParams:
    """Constants of one HVAC load circuit."""

    t_feed_hvac: float  # degC, feed set temperature held by the mixing valve
    m_dot_hvac: float   # kg/s circulating in the distribution loop
    fluid: FluidProps = WATER
    #: Optional fixed tank-side return temperature (degC).  Default None
    #: keeps the energy-closing emitter-outlet return.
    t_return_override: Optional[float] = None

    def __post_init__(self):
        if self.m_dot_hvac <= 0.0:
            raise InvalidInputError("m_dot_hvac must be > 0")


@dataclass(frozen=True)
class LoadResult:
    m_dot_tank: float     # kg/s drawn from the tank
    t_return_tank: float  # degC sent back to the tank
    p_th: float           # W covered (== demand)


def _draw(p: LoadParams, p_load: float, dt: float) -> float:
    return p_load * p.m_dot_hvac / (p.m_dot_hvac * p.fluid.c_p * dt + p_load)


def heating_load_draw(p: LoadParams, p_load: float, t_tank: float) -> LoadResult:
    """Draw on the hot tank covering a heating demand of p_load watts.

    t_tank is the supply temperature at the tank's load tap.  It must
    exceed the feed set temperature whenever power is demanded.
    """
    if p_load < 0.0:
        raise InvalidInputError("heating demand must be >= 0")
    if p_load == 0.0:
        return LoadResult(0.0, p.t_feed_hvac, 0.0)
    if t_tank <= p.t_feed_hvac:
        raise InsufficientTankTemperatureError(
            f"hot tank supplies {t_tank:.2f} degC at the load tap but the "
            f"heating circuit needs a feed of {p.t_feed_hvac:.2f} degC"
        )
    m_t = _draw(p, p_load, t_tank - p.t_feed_hvac)
    t_ret = p.t_feed_hvac - p_load / (p.m_dot_hvac * p.fluid.c_p)
    if p.t_return_override is not None:
        t_ret = p.t_return_override
    return LoadResult(m_t, t_ret, p_load)


def cooling_load_draw(p: LoadParams, p_load: float, t_tank: float) -> LoadResult:
    """Draw on the cold tank covering a cooling demand of p_load watts."""
    if p_load < 0.0:
        raise InvalidInputError("cooling demand must be >= 0")
    if p_load == 0.0:
        return LoadResult(0.0, p.t_feed_hvac, 0.0)
    if t_tank >= p.t_feed_hvac:
        raise InsufficientTankTemperatureError(
            f"cold tank supplies {t_tank:.2f} degC at the load tap but the "
            f"cooling circuit needs a feed of {p.t_feed_hvac:.2f} degC"
        )
    m_t = _draw(p, p_load, p.t_feed_hvac - t_tank)
    t_ret = p.t_feed_hvac + p_load / (p.m_dot_hvac * p.fluid.c_p)
    if p.t_return_override is not None:
        t_ret = p.t_return_override
    return LoadResult(m_t, t_ret, p_load)

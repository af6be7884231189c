"""Static grey-box models of the thermal machines.

Three machines couple the storage tanks to each other and to the outdoor
loop:

* an adsorption chiller (AdCM) with hot (HT), medium (MT) and low (LT)
  temperature circuits, described by quadratic capacity and COP maps over
  the three return-line temperatures;
* a gas engine cogeneration unit (CHP) whose thermal output follows a first
  order lag while its circulation pump tracks a quadratic flow curve of the
  return temperature;
* a reversible brine/water heat pump operated either as heat pump (HP,
  heating the hot tank) or as compression chiller (CCM, cooling the cold
  tank), with quadratic capacity maps and an electric power map over the
  evaporator and condenser return temperatures.

All capacity and power maps are stored in kW exactly as printed on plant
datasheets; conversion to W happens here at the model boundary.  Circuit
conventions: HT and LT circuits carry water, the MT circuit to the outdoor
loop carries brine on the reversible heat pump and water on the adsorption
chiller.
"""

from dataclasses import dataclass

from .core import (
    BRINE,
    WATER,
    CircuitResult,
    FluidProps,
    check_switch,
    circuit_mass_flow,
    temp_after_heat,
)
from .fitting import PolyMap, eval_map

KW = 1000.0


# ---------------------------------------------------------------------------
# adsorption chiller


@dataclass(frozen=True)
class AdcmParams:
    cooling_map: PolyMap   # LT cooling capacity, kW, over (T_rl_LT, T_rl_HT, T_rl_MT)
    cop_map: PolyMap       # thermal COP over the same inputs
    v_dot_lt: float        # m3/h
    v_dot_mt: float        # m3/h
    v_dot_ht: float        # m3/h
    p_el_nom: float        # W, pumps and controller while running
    cop_floor: float = 0.05  # guards the HT power against a vanishing COP
    fluid: FluidProps = WATER  # all three circuits run plain water

    def __post_init__(self):
        if self.cooling_map.n_vars != 3 or self.cop_map.n_vars != 3:
            raise ValueError("adsorption chiller maps take 3 inputs")


@dataclass(frozen=True)
class AdcmResult:
    lt: CircuitResult
    ht: CircuitResult
    mt: CircuitResult
    cop: float
    p_el: float


def adcm_step(p: AdcmParams, t_rl_lt: float, t_rl_ht: float, t_rl_mt: float,
              switch) -> AdcmResult:
    """Evaluate the adsorption chiller at the current return temperatures.

    The capacity maps are static, so they are evaluated regardless of the
    switch; the switch only gates mass flows and electric power.  The medium
    temperature circuit rejects both the driving heat and the cold
    production, which makes the MT power the exact sum of the other two.
    """
    check_switch(switch)
    p_lt = max(eval_map(p.cooling_map, (t_rl_lt, t_rl_ht, t_rl_mt)), 0.0) * KW
    cop = max(eval_map(p.cop_map, (t_rl_lt, t_rl_ht, t_rl_mt)), p.cop_floor)
    p_ht = p_lt / cop
    p_mt = p_ht + p_lt

    lt = CircuitResult(
        t_rl=t_rl_lt,
        t_fl=temp_after_heat(t_rl_lt, p_lt, p.v_dot_lt, p.fluid, -1),
        v_dot=p.v_dot_lt,
        m_dot=circuit_mass_flow(switch, p.v_dot_lt, p.fluid),
        p_th=p_lt,
    )
    ht = CircuitResult(
        t_rl=t_rl_ht,
        t_fl=temp_after_heat(t_rl_ht, p_ht, p.v_dot_ht, p.fluid, -1),
        v_dot=p.v_dot_ht,
        m_dot=circuit_mass_flow(switch, p.v_dot_ht, p.fluid),
        p_th=p_ht,
    )
    mt = CircuitResult(
        t_rl=t_rl_mt,
        t_fl=temp_after_heat(t_rl_mt, p_mt, p.v_dot_mt, p.fluid, +1),
        v_dot=p.v_dot_mt,
        m_dot=circuit_mass_flow(switch, p.v_dot_mt, p.fluid),
        p_th=p_mt,
    )
    return AdcmResult(lt=lt, ht=ht, mt=mt, cop=cop, p_el=switch * p.p_el_nom)


# ---------------------------------------------------------------------------
# cogeneration unit


@dataclass(frozen=True)
class ChpParams:
    flow_curve: PolyMap    # pump volume flow in m3/h over the return temperature
    time_constant: float   # s, first order lag of the thermal output
    p_el_nom: float        # W
    p_th_nom: float        # W
    eta_el_nom: float
    eta_th_nom: float
    hcv_fuel: float        # higher calorific value of the fuel gas, Wh/m3
    v_dot_min: float = 0.3  # m3/h, pump floor
    v_dot_max: float = 1.3  # m3/h, pump ceiling
    fluid: FluidProps = WATER

    def __post_init__(self):
        if self.flow_curve.n_vars != 1:
            raise ValueError("the CHP flow curve takes one input")
        if self.time_constant <= 0.0:
            raise ValueError("the CHP time constant must be positive")
        if not (0.0 < self.v_dot_min <= self.v_dot_max):
            raise ValueError("need 0 < v_dot_min <= v_dot_max")


@dataclass(frozen=True)
class ChpOutputs:
    t_rl: float
    t_fl: float
    v_dot: float    # m3/h, clamped flow curve value
    m_dot: float    # kg/s
    p_th: float     # W, current lagged thermal output
    p_el: float     # W
    v_fuel: float   # m3/h fuel gas


def chp_dPth_dt(p: ChpParams, p_th: float, switch) -> float:
    """Rate of change of the lagged thermal output (W/s)."""
    check_switch(switch)
    return (p.p_th_nom * switch - p_th) / p.time_constant


def chp_outputs(p: ChpParams, p_th: float, t_rl: float, switch) -> ChpOutputs:
    """Algebraic outputs of the CHP for the current lag state and return temp.

    The internal controller drives the pump toward the highest possible feed
    temperature; with the identified flow curve this pins the flow at its
    lower clamp over the whole heating window, giving the large feed/return
    spread seen on the real unit.  Electric output and fuel draw switch as a
    block because the engine has no part-load operation here.
    """
    check_switch(switch)
    v_raw = eval_map(p.flow_curve, (t_rl,))
    v_dot = min(max(v_raw, p.v_dot_min), p.v_dot_max)
    v_fuel = switch * (p.p_el_nom + p.p_th_nom) / (
        p.hcv_fuel * (p.eta_el_nom + p.eta_th_nom)
    )
    return ChpOutputs(
        t_rl=t_rl,
        t_fl=temp_after_heat(t_rl, p_th, v_dot, p.fluid, +1),
        v_dot=v_dot,
        m_dot=circuit_mass_flow(switch, v_dot, p.fluid),
        p_th=p_th,
        p_el=switch * p.p_el_nom,
        v_fuel=v_fuel,
    )


# ---------------------------------------------------------------------------
# reversible heat pump


@dataclass(frozen=True)
class RevHpParams:
    heating_map: PolyMap   # HP-mode HT capacity, kW, over (T_rl_HT, T_rl_MT)
    cooling_map: PolyMap   # CCM-mode LT capacity, kW, over (T_rl_MT, T_rl_LT)
    power_map: PolyMap     # electric draw, kW, over (T evaporator, T condenser)
    v_dot_ht: float        # m3/h, water to the hot tank
    v_dot_mt: float        # m3/h, brine to the outdoor loop
    v_dot_lt: float        # m3/h, water to the cold tank
    fluid_water: FluidProps = WATER
    fluid_brine: FluidProps = BRINE

    def __post_init__(self):
        for name in ("heating_map", "cooling_map", "power_map"):
            if getattr(self, name).n_vars != 2:
                raise ValueError(f"{name} takes 2 inputs")


@dataclass(frozen=True)
class HpResult:
    ht: CircuitResult
    mt: CircuitResult
    p_el: float
    cop: float


@dataclass(frozen=True)
class CcmResult:
    mt: CircuitResult
    lt: CircuitResult
    p_el: float
    cop: float


def hp_step(p: RevHpParams, t_rl_ht: float, t_rl_mt: float, switch) -> HpResult:
    """Heat pump mode: condenser heats the hot tank, evaporator draws on the
    brine loop.  The evaporator side of the electric power map sees the MT
    return, the condenser side the HT return."""
    check_switch(switch)
    p_ht = eval_map(p.heating_map, (t_rl_ht, t_rl_mt)) * KW
    p_el = switch * eval_map(p.power_map, (t_rl_mt, t_rl_ht)) * KW
    p_mt = p_ht - p_el

    ht = CircuitResult(
        t_rl=t_rl_ht,
        t_fl=temp_after_heat(t_rl_ht, p_ht, p.v_dot_ht, p.fluid_water, +1),
        v_dot=p.v_dot_ht,
        m_dot=circuit_mass_flow(switch, p.v_dot_ht, p.fluid_water),
        p_th=p_ht,
    )
    mt = CircuitResult(
        t_rl=t_rl_mt,
        t_fl=temp_after_heat(t_rl_mt, p_mt, p.v_dot_mt, p.fluid_brine, -1),
        v_dot=p.v_dot_mt,
        m_dot=circuit_mass_flow(switch, p.v_dot_mt, p.fluid_brine),
        p_th=p_mt,
    )
    cop = p_ht / p_el if (switch and p_el > 0.0) else 0.0
    return HpResult(ht=ht, mt=mt, p_el=p_el, cop=cop)


def ccm_step(p: RevHpParams, t_rl_mt: float, t_rl_lt: float, switch) -> CcmResult:
    """Compression chiller mode: evaporator cools the cold tank, condenser
    rejects into the brine loop.  Evaporator input of the power map is the LT
    return, condenser input the MT return."""
    check_switch(switch)
    p_lt = eval_map(p.cooling_map, (t_rl_mt, t_rl_lt)) * KW
    p_el = switch * eval_map(p.power_map, (t_rl_lt, t_rl_mt)) * KW
    p_mt = p_lt + p_el

    mt = CircuitResult(
        t_rl=t_rl_mt,
        t_fl=temp_after_heat(t_rl_mt, p_mt, p.v_dot_mt, p.fluid_brine, +1),
        v_dot=p.v_dot_mt,
        m_dot=circuit_mass_flow(switch, p.v_dot_mt, p.fluid_brine),
        p_th=p_mt,
    )
    lt = CircuitResult(
        t_rl=t_rl_lt,
        t_fl=temp_after_heat(t_rl_lt, p_lt, p.v_dot_lt, p.fluid_water, -1),
        v_dot=p.v_dot_lt,
        m_dot=circuit_mass_flow(switch, p.v_dot_lt, p.fluid_water),
        p_th=p_lt,
    )
    cop = p_lt / p_el if (switch and p_el > 0.0) else 0.0
    return CcmResult(mt=mt, lt=lt, p_el=p_el, cop=cop)

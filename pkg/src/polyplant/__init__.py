"""Grey-box modeling and simulation of a microscale polygeneration plant.

The package couples quadratic performance maps for the thermal machines
(adsorption chiller, CHP engine, reversible heat pump) with stratified
storage tanks, a dry cooling tower and synthetic HVAC loads, and runs the
assembled plant through four seasonal operating modes.  Map and step
response identification, validation metrics and a small CLI round out the
toolkit.
"""

from .core import (AIR, BRINE, WATER, CircuitResult, FluidProps,
                   check_switch, circuit_mass_flow, temp_after_heat)
from .errors import (AlignmentError, ConfigurationError, DegenerateFitError,
                     DegenerateSeriesError, InsufficientTankTemperatureError,
                     InvalidInputError, InvalidSampleError,
                     NumericalDivergenceError)
from .fitting import (BASIS_EXPONENTS, N_COEFFS, FitResult, PolyMap, Sample,
                      StepResponseFit, basis, eval_map, fit_map,
                      fit_step_ensemble, fit_step_response, monomial_name)
from .machines import (AdcmParams, AdcmResult, CcmResult, ChpOutputs,
                       ChpParams, HpResult, RevHpParams, adcm_step,
                       ccm_step, chp_dPth_dt, chp_outputs, hp_step)
from .heat_rejection import (FanState, OcParams, OcResult, fan_state,
                             ntu_effectiveness, oc_step)
from .storage import (OMEGA_DEFAULT, LayerGeometry, TankBoundary,
                      TankGeometry, interlayer_flows, layer_geometry,
                      outlet_temps, sensor_temps, tank_derivatives_reference,
                      tank_derivatives_smooth)
from .loads import (LoadParams, LoadResult, cooling_load_draw,
                    heating_load_draw)
from .metrics import (PairedSeries, align, gof, nrmsre, r_squared,
                      rolling_mean)
from .simulation import (BoundarySeries, Mode, PlantConfig, PlantModel,
                         Scenario, SetPoint, SimLog, SwitchSchedule,
                         assemble, run, step)
from .config import load_plant, load_scenario, parse_plant, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "AIR", "BRINE", "WATER", "CircuitResult", "FluidProps",
    "check_switch", "circuit_mass_flow", "temp_after_heat",
    "AlignmentError", "ConfigurationError", "DegenerateFitError",
    "DegenerateSeriesError", "InsufficientTankTemperatureError",
    "InvalidInputError", "InvalidSampleError", "NumericalDivergenceError",
    "BASIS_EXPONENTS", "N_COEFFS", "FitResult", "PolyMap", "Sample",
    "StepResponseFit", "basis", "eval_map", "fit_map", "fit_step_ensemble",
    "fit_step_response", "monomial_name",
    "AdcmParams", "AdcmResult", "CcmResult", "ChpOutputs", "ChpParams",
    "HpResult", "RevHpParams", "adcm_step", "ccm_step", "chp_dPth_dt",
    "chp_outputs", "hp_step",
    "FanState", "OcParams", "OcResult", "fan_state", "ntu_effectiveness",
    "oc_step",
    "OMEGA_DEFAULT", "LayerGeometry", "TankBoundary", "TankGeometry",
    "interlayer_flows", "layer_geometry", "outlet_temps", "sensor_temps",
    "tank_derivatives_reference", "tank_derivatives_smooth",
    "LoadParams", "LoadResult", "cooling_load_draw", "heating_load_draw",
    "PairedSeries", "align", "gof", "nrmsre", "r_squared", "rolling_mean",
    "BoundarySeries", "Mode", "PlantConfig", "PlantModel", "Scenario",
    "SetPoint", "SimLog", "SwitchSchedule", "assemble", "run", "step",
    "load_plant", "load_scenario", "parse_plant", "parse_scenario",
    "__version__",
]

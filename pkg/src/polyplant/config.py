"""JSON plant and scenario configuration.

Two files describe one simulation: the plant file holds the component
parameter blocks (maps, flows, tank geometry, loads), the scenario file
holds mode, initial temperatures, boundary series, switch schedules and the
stop rule.  Keys starting with an underscore are comments and ignored
everywhere, so configs can carry their own documentation.

Missing or malformed keys raise ConfigurationError listing every offending
key at once rather than failing one key at a time.
"""

import json
from typing import Optional

from .core import BRINE, WATER, FluidProps
from .errors import ConfigurationError
from .fitting import PolyMap, N_COEFFS
from .heat_rejection import OcParams
from .loads import LoadParams
from .machines import AdcmParams, ChpParams, RevHpParams
from .simulation import (BoundarySeries, Mode, PlantConfig, Scenario,
                         SetPoint, SwitchSchedule)
from .storage import OMEGA_DEFAULT, TankGeometry


def _strip_notes(obj):
    if isinstance(obj, dict):
        return {k: _strip_notes(v) for k, v in obj.items()
                if not k.startswith("_")}
    return obj


class _Block:
    """One config sub-dictionary with collected-error field access."""

    def __init__(self, data: dict, path: str, errors: list):
        self.data = data
        self.path = path
        self.errors = errors

    def child(self, key: str) -> Optional["_Block"]:
        v = self.data.get(key)
        if v is None:
            return None
        if not isinstance(v, dict):
            self.errors.append(f"{self.path}{key}: expected an object")
            return None
        return _Block(v, f"{self.path}{key}.", self.errors)

    def require(self, key: str, kind=float):
        if key not in self.data:
            self.errors.append(f"{self.path}{key}: missing")
            return None
        return self._convert(key, self.data[key], kind)

    def optional(self, key: str, default, kind=float):
        if key not in self.data:
            return default
        return self._convert(key, self.data[key], kind)

    def _convert(self, key, v, kind):
        try:
            if kind is float:
                return float(v)
            if kind is int:
                iv = int(v)
                if iv != v:
                    raise ValueError
                return iv
            if kind is str:
                if not isinstance(v, str):
                    raise ValueError
                return v
            if kind is list:
                if not isinstance(v, list):
                    raise ValueError
                return v
        except (TypeError, ValueError):
            pass
        self.errors.append(f"{self.path}{key}: cannot read as {kind.__name__}")
        return None

    def poly(self, key: str, n_vars: int) -> Optional[PolyMap]:
        coeffs = self.require(key, list)
        if coeffs is None:
            return None
        want = N_COEFFS[n_vars]
        try:
            coeffs = [float(c) for c in coeffs]
        except (TypeError, ValueError):
            self.errors.append(f"{self.path}{key}: coefficients must be numbers")
            return None
        if len(coeffs) != want:
            self.errors.append(
                f"{self.path}{key}: needs {want} coefficients for "
                f"{n_vars} inputs, got {len(coeffs)}"
            )
            return None
        return PolyMap(n_vars=n_vars, coeffs=tuple(coeffs))


def _finish(errors: list, what: str):
    if errors:
        raise ConfigurationError(
            f"invalid {what} configuration: " + "; ".join(errors)
        )


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {what} file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{what} file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{what} file {path} must hold a JSON object")
    return _strip_notes(data)


def _fluid(block: Optional[_Block], fallback: FluidProps) -> FluidProps:
    if block is None:
        return fallback
    rho = block.optional("rho", fallback.rho)
    c_p = block.optional("c_p", fallback.c_p)
    return FluidProps(rho=rho, c_p=c_p)


def parse_plant(data: dict) -> PlantConfig:
    """Build a PlantConfig from a parsed (note-stripped) JSON object."""
    errors: list = []
    root = _Block(data, "", errors)

    fluids = root.child("fluids")
    water = _fluid(fluids.child("water") if fluids else None, WATER)
    brine = _fluid(fluids.child("brine") if fluids else None, BRINE)

    tanks = {}
    for key in ("htes", "ctes"):
        b = root.child(key)
        if b is None:
            errors.append(f"{key}: missing")
            continue
        kw = dict(
            diameter=b.require("diameter"),
            height=b.require("height"),
            wall_thickness=b.require("wall_thickness"),
            n_layers=b.require("n_layers", int),
            load_layer=b.require("load_layer", int),
            k_loss=b.require("k_loss"),
            lambda_eff=b.require("lambda_eff"),
            orientation=b.require("orientation", str),
        )
        if not errors:
            tanks[key] = TankGeometry(**kw)

    loads = {}
    for key in ("load_h", "load_c"):
        b = root.child(key)
        if b is None:
            errors.append(f"{key}: missing")
            continue
        kw = dict(
            t_feed_hvac=b.require("t_feed_hvac"),
            m_dot_hvac=b.require("m_dot_hvac"),
            fluid=water,
        )
        override = b.optional("t_return_override", None)
        if not errors:
            loads[key] = LoadParams(t_return_override=override, **kw)

    adcm = None
    b = root.child("adcm")
    if b is not None:
        kw = dict(
            cooling_map=b.poly("cooling_map", 3),
            cop_map=b.poly("cop_map", 3),
            v_dot_lt=b.require("v_dot_lt"),
            v_dot_mt=b.require("v_dot_mt"),
            v_dot_ht=b.require("v_dot_ht"),
            p_el_nom=b.require("p_el_nom"),
            cop_floor=b.optional("cop_floor", 0.05),
            fluid=water,
        )
        if not errors:
            adcm = AdcmParams(**kw)

    chp = None
    b = root.child("chp")
    if b is not None:
        kw = dict(
            flow_curve=b.poly("flow_curve", 1),
            time_constant=b.require("time_constant"),
            p_el_nom=b.require("p_el_nom"),
            p_th_nom=b.require("p_th_nom"),
            eta_el_nom=b.require("eta_el_nom"),
            eta_th_nom=b.require("eta_th_nom"),
            hcv_fuel=b.require("hcv_fuel"),
            v_dot_min=b.optional("v_dot_min", 0.3),
            v_dot_max=b.optional("v_dot_max", 1.3),
            fluid=water,
        )
        if not errors:
            chp = ChpParams(**kw)

    rev_hp = None
    b = root.child("rev_hp")
    if b is not None:
        kw = dict(
            heating_map=b.poly("heating_map", 2),
            cooling_map=b.poly("cooling_map", 2),
            power_map=b.poly("power_map", 2),
            v_dot_ht=b.require("v_dot_ht"),
            v_dot_mt=b.require("v_dot_mt"),
            v_dot_lt=b.require("v_dot_lt"),
            fluid_water=water,
            fluid_brine=brine,
        )
        if not errors:
            rev_hp = RevHpParams(**kw)

    oc = None
    b = root.child("oc")
    if b is not None:
        kw = dict(
            ua=b.require("ua"),
            rpm_max=b.require("rpm_max"),
            p_el_max=b.require("p_el_max"),
            m_air_max=b.require("m_air_max"),
            v_max=b.optional("v_max", 10.0),
            fluid=brine,
        )
        c_p_air = b.optional("c_p_air", None)
        if not errors:
            if c_p_air is not None:
                kw["c_p_air"] = c_p_air
            oc = OcParams(**kw)

    _finish(errors, "plant")
    return PlantConfig(
        htes=tanks["htes"],
        ctes=tanks["ctes"],
        load_h=loads["load_h"],
        load_c=loads["load_c"],
        adcm=adcm,
        chp=chp,
        rev_hp=rev_hp,
        oc=oc,
        adcm_tap_layer=root.optional("adcm_tap_layer", 70, int),
        n_sensors_htes=root.optional("n_sensors_htes", 9, int),
        n_sensors_ctes=root.optional("n_sensors_ctes", 4, int),
        omega=root.optional("omega", OMEGA_DEFAULT),
        v_dot_oc=root.optional("v_dot_oc", 4.7),
        fluid_water=water,
    )


def _series(b: _Block, key: str, errors: list) -> Optional[BoundarySeries]:
    v = b.data.get(key)
    if v is None:
        errors.append(f"{key}: missing")
        return None
    if isinstance(v, (int, float)):
        return BoundarySeries.constant(float(v))
    if isinstance(v, dict) and "times" in v and "values" in v:
        try:
            return BoundarySeries(times=tuple(float(t) for t in v["times"]),
                                  values=tuple(float(x) for x in v["values"]))
        except (TypeError, ValueError, ConfigurationError) as exc:
            errors.append(f"{key}: {exc}")
            return None
    errors.append(f"{key}: expected a number or {{times, values}} object")
    return None


def _switches(b: Optional[_Block], errors: list) -> dict:
    out = {}
    if b is None:
        return out
    for key, v in b.data.items():
        if isinstance(v, (int, float)) and v in (0, 1):
            out[key] = SwitchSchedule.always(int(v))
        elif isinstance(v, dict) and "times" in v and "values" in v:
            try:
                out[key] = SwitchSchedule(
                    times=tuple(float(t) for t in v["times"]),
                    values=tuple(int(x) for x in v["values"]))
            except (TypeError, ValueError, ConfigurationError) as exc:
                errors.append(f"switches.{key}: {exc}")
        else:
            errors.append(f"switches.{key}: expected 0/1 or {{times, values}}")
    return out


def parse_scenario(data: dict) -> Scenario:
    """Build a Scenario from a parsed (note-stripped) JSON object."""
    errors: list = []
    root = _Block(data, "", errors)

    mode_token = root.require("mode", str)
    mode = None
    if mode_token is not None:
        try:
            mode = Mode(mode_token)
        except ValueError:
            errors.append(
                f"mode: {mode_token!r} is not one of "
                + ", ".join(m.value for m in Mode)
            )

    def init_profile(key):
        v = root.data.get(key)
        if v is None:
            errors.append(f"{key}: missing")
            return 20.0
        if isinstance(v, (int, float)):
            return float(v)
        if isinstance(v, list):
            try:
                return tuple(float(x) for x in v)
            except (TypeError, ValueError):
                pass
        errors.append(f"{key}: expected a number or list of layer temps")
        return 20.0

    t_init_htes = init_profile("t_init_htes")
    t_init_ctes = init_profile("t_init_ctes")

    t_amb = _series(root, "t_amb", errors)
    p_load_h = _series(root, "p_load_h", errors)
    p_load_c = _series(root, "p_load_c", errors)

    switches = _switches(root.child("switches"), errors)

    sp = None
    b = root.child("set_point")
    if b is None:
        errors.append("set_point: missing")
    else:
        kw = dict(
            channel=b.require("channel", str),
            threshold=b.require("threshold"),
            direction=b.require("direction", str),
        )
        if not errors:
            try:
                sp = SetPoint(**kw)
            except ConfigurationError as exc:
                errors.append(f"set_point: {exc}")

    flows = {}
    b = root.child("flows")
    if b is not None:
        for key, v in b.data.items():
            try:
                flows[key] = float(v)
            except (TypeError, ValueError):
                errors.append(f"flows.{key}: expected a number")

    horizon = root.require("horizon_s")
    dt = root.optional("dt_s", 5.0)
    v_set_oc = root.optional("v_set_oc", 0.0)
    chp_p_th_init = root.optional("chp_p_th_init", 0.0)

    _finish(errors, "scenario")
    try:
        return Scenario(
            mode=mode,
            t_init_htes=t_init_htes,
            t_init_ctes=t_init_ctes,
            t_amb=t_amb,
            p_load_h=p_load_h,
            p_load_c=p_load_c,
            switches=switches,
            set_point=sp,
            horizon=horizon,
            dt=dt,
            flows=flows,
            v_set_oc=v_set_oc,
            chp_p_th_init=chp_p_th_init,
        )
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"invalid scenario configuration: {exc}") from exc


def load_plant(path: str) -> PlantConfig:
    return parse_plant(_load_json(path, "plant"))


def load_scenario(path: str) -> Scenario:
    return parse_scenario(_load_json(path, "scenario"))

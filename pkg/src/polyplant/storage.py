"""One-dimensional multi-layer model of a stratified storage tank.

The tank is sliced into N horizontal layers of equal height, numbered 1
(bottom) to N (top); arrays in this module are ordered bottom to top.  Two
external circuits act on the tank:

* the *source* circuit of the machine charging the tank.  On a hot tank it
  feeds the top layer and draws its return from the bottom layer; on a cold
  tank the orientation mirrors (cold feed enters the bottom, the draw leaves
  the top).
* the *load* circuit.  It taps the layer ``load_layer`` and sends its return
  to the opposite end (bottom of a hot tank, top of a cold tank).

Between adjacent layers a net vertical plug flow results from the imbalance
of the two circuits.  The energy balance of every layer combines that
advection with conduction across the water body, heat loss through the
wall, and the direct feed/draw streams.

Advection is bookkept per *face* (the N-1 horizontal interfaces): each face
carries one net mass flow, positive downward, and transports enthalpy
upwind.  Summed over the tank the face fluxes telescope away, so total
enthalpy is conserved exactly up to the boundary streams and wall losses,
whatever the layer count.

Two variants of the derivative field exist.  The reference variant selects
the upwind donor layer with hard conditionals, which makes the field
non-differentiable wherever a face flow crosses zero.  The smooth variant
replaces the selection by

    flux = f * (T_hi + T_lo)/2 + sqrt(f^2 + omega) * (T_hi - T_lo)/2

which is continuously differentiable in f and coincides with upwinding for
|f| >> sqrt(omega).  With both circuits off all face flows vanish and the
smoothing is bypassed entirely, so a resting tank keeps its stratification
and the two variants agree exactly.
"""

from dataclasses import dataclass

import math

import numpy as np

from .core import WATER, FluidProps
from .errors import InvalidInputError

#: Default smoothing constant (kg/s)^2 for the differentiable upwind flux.
OMEGA_DEFAULT = 2e-4


@dataclass(frozen=True)
class TankGeometry:
    """Shape, discretisation and loss parameters of one tank."""

    diameter: float        # m, outer shell
    height: float          # m
    wall_thickness: float  # m
    n_layers: int
    load_layer: int        # 1-based tap layer of the load circuit
    k_loss: float          # W/(m2 K) through the insulated wall
    lambda_eff: float      # W/(m K) effective vertical conductivity of the water
    orientation: str       # 'hot' (charged at the top) or 'cold' (at the bottom)

    def __post_init__(self):
        if self.n_layers < 2:
            raise InvalidInputError("a tank needs at least 2 layers")
        if not (1 <= self.load_layer <= self.n_layers):
            raise InvalidInputError(
                f"load_layer must be in 1..{self.n_layers}, got {self.load_layer}"
            )
        if self.orientation not in ("hot", "cold"):
            raise InvalidInputError(
                f"orientation must be 'hot' or 'cold', got {self.orientation!r}"
            )
        if self.diameter <= 2.0 * self.wall_thickness or self.height <= 0.0:
            raise InvalidInputError("tank dimensions are not physical")
        if self.k_loss < 0.0 or self.lambda_eff < 0.0:
            raise InvalidInputError("loss parameters must be >= 0")


@dataclass(frozen=True)
class LayerGeometry:
    """Per-layer quantities derived from the tank geometry."""

    z: float        # m, layer height
    a_ext: float    # m2, wall area of one layer
    a_cross: float  # m2, horizontal cross-section of the water body
    m_layer: float  # kg of water per layer


@dataclass(frozen=True)
class TankBoundary:
    """Boundary conditions of one tank at one instant."""

    m_dot_src: float     # kg/s from the charging machine
    t_feed_src: float    # degC of the source feed entering the tank
    m_dot_load: float    # kg/s drawn by the load circuit
    t_return_load: float  # degC of the load return entering the tank
    t_amb: float         # degC around the shell

    def __post_init__(self):
        if self.m_dot_src < 0.0 or self.m_dot_load < 0.0:
            raise InvalidInputError("boundary mass flows must be >= 0")


def layer_geometry(g: TankGeometry, fluid: FluidProps = WATER) -> LayerGeometry:
    """Slice the tank into layers of equal height."""
    z = g.height / g.n_layers
    a_ext = math.pi * g.diameter * z
    d_in = g.diameter - 2.0 * g.wall_thickness
    a_cross = math.pi * d_in * d_in / 4.0
    return LayerGeometry(z=z, a_ext=a_ext, a_cross=a_cross,
                         m_layer=a_cross * z * fluid.rho)


def interlayer_flows(g: TankGeometry, b: TankBoundary) -> np.ndarray:
    """Net mass flow through each of the N-1 faces, positive downward.

    Face i (1-based) separates layers i and i+1.  A mass balance over the
    layers above a face yields the net flow: on a hot tank every face at or
    above the load tap carries the full source flow downward while the faces
    below it carry source minus load; the cold orientation mirrors the
    pattern with reversed sign.
    """
    n = g.n_layers
    f = np.empty(n - 1)
    tap = g.load_layer - 1  # first face index at/above the tap
    if g.orientation == "hot":
        f[:tap] = b.m_dot_src - b.m_dot_load
        f[tap:] = b.m_dot_src
    else:
        f[:tap] = -b.m_dot_src
        f[tap:] = b.m_dot_load - b.m_dot_src
    return f


def _boundary_streams(g: TankGeometry, temps: np.ndarray, b: TankBoundary) -> np.ndarray:
    """Enthalpy source terms (kg/s * degC) of the feed, draw and return ports."""
    n = g.n_layers
    stream = np.zeros(n)
    tap = g.load_layer - 1
    if g.orientation == "hot":
        feed, draw, ret = n - 1, 0, 0
    else:
        feed, draw, ret = 0, n - 1, n - 1
    stream[feed] += b.m_dot_src * b.t_feed_src
    stream[draw] -= b.m_dot_src * temps[draw]
    stream[tap] -= b.m_dot_load * temps[tap]
    stream[ret] += b.m_dot_load * b.t_return_load
    return stream


def _assemble(g: TankGeometry, geom: LayerGeometry, temps: np.ndarray,
              b: TankBoundary, face_flux: np.ndarray,
              fluid: FluidProps) -> np.ndarray:
    """Combine advection, ports, conduction and wall loss into dT/dt."""
    n = g.n_layers
    adv = np.zeros(n)
    adv[:-1] += face_flux   # downward flux enters the layer below the face
    adv[1:] -= face_flux    # and leaves the layer above it
    adv += _boundary_streams(g, temps, b)

    cond = np.zeros(n)
    d_up = temps[1:] - temps[:-1]
    cond[:-1] += d_up       # zero-flux ends: missing neighbours drop out
    cond[1:] -= d_up
    cond *= geom.a_cross * g.lambda_eff / geom.z

    loss = g.k_loss * geom.a_ext * (temps - b.t_amb)
    return (fluid.c_p * adv + cond - loss) / (geom.m_layer * fluid.c_p)


def tank_derivatives_smooth(g: TankGeometry, geom: LayerGeometry,
                            temps, b: TankBoundary,
                            omega: float = OMEGA_DEFAULT,
                            fluid: FluidProps = WATER) -> np.ndarray:
    """Layer temperature derivatives with the differentiable upwind flux.

    omega must be small against the square of the working face flows; the
    default suits flows of a few hundredths of kg/s and above.  With both
    circuits idle the advection is skipped outright, so a resting tank sees
    conduction and wall losses only.
    """
    t = np.asarray(temps, dtype=float)
    if t.shape != (g.n_layers,):
        raise InvalidInputError(f"expected {g.n_layers} layer temperatures")
    if omega < 0.0:
        raise InvalidInputError("omega must be >= 0")
    if b.m_dot_src == 0.0 and b.m_dot_load == 0.0:
        flux = np.zeros(g.n_layers - 1)
    else:
        f = interlayer_flows(g, b)
        lo, hi = t[:-1], t[1:]
        flux = f * (hi + lo) / 2.0 + np.sqrt(f * f + omega) * (hi - lo) / 2.0
    return _assemble(g, geom, t, b, flux, fluid)


def tank_derivatives_reference(g: TankGeometry, geom: LayerGeometry,
                               temps, b: TankBoundary,
                               fluid: FluidProps = WATER) -> np.ndarray:
    """Layer temperature derivatives with hard upwind donor selection.

    Serves as the conservation oracle for the smooth variant; its derivative
    field is discontinuous in the face flows, which is precisely what the
    smooth variant removes.
    """
    t = np.asarray(temps, dtype=float)
    if t.shape != (g.n_layers,):
        raise InvalidInputError(f"expected {g.n_layers} layer temperatures")
    f = interlayer_flows(g, b)
    lo, hi = t[:-1], t[1:]
    flux = np.where(f > 0.0, f * hi, f * lo)  # donor = upstream layer; f=0 gives 0
    return _assemble(g, geom, t, b, flux, fluid)


def outlet_temps(g: TankGeometry, temps) -> tuple:
    """(source return, load feed) temperatures leaving the tank.

    The source return is what the charging machine sees coming back from the
    tank (bottom of a hot tank, top of a cold tank); the load feed is the
    water drawn at the tap layer.
    """
    t = np.asarray(temps, dtype=float)
    if t.shape != (g.n_layers,):
        raise InvalidInputError(f"expected {g.n_layers} layer temperatures")
    src = t[0] if g.orientation == "hot" else t[-1]
    return float(src), float(t[g.load_layer - 1])


def sensor_temps(g: TankGeometry, temps, n_sensors: int) -> np.ndarray:
    """Block-mean sensor readings, bottom to top.

    The physical tank carries n_sensors probes spread evenly over the
    height; each reading is modelled as the mean of its block of layers.
    """
    t = np.asarray(temps, dtype=float)
    if t.shape != (g.n_layers,):
        raise InvalidInputError(f"expected {g.n_layers} layer temperatures")
    if n_sensors < 1 or g.n_layers % n_sensors != 0:
        raise InvalidInputError(
            f"{n_sensors} sensors do not divide {g.n_layers} layers evenly"
        )
    return t.reshape(n_sensors, g.n_layers // n_sensors).mean(axis=1)

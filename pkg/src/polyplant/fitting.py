"""Identification engine for the static and dynamic grey-box sub-models.

Two model families cover every machine in the plant:

* multivariate quadratic performance maps (1 to 3 inputs) fitted by least
  squares, optionally with every residual weighted by the inverse of the
  measured output so that the objective becomes the sum of squared
  *relative* deviations;
* first order lag step responses ``y(t) = K_S * u * (1 - exp(-t / T_S))``
  fitted by a closed-form gain and a golden-section search over the time
  constant.

Coefficients are always returned in raw input units so they can be printed,
stored in config files and compared across plants.  Internally the inputs
are centred and scaled before solving to keep the design matrix well
conditioned; the transform is inverted algebraically before returning.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFitError, InvalidInputError, InvalidSampleError

#: Monomial exponents per input count, in the documented coefficient order.
#: With two inputs the cross term precedes the pure quadratics; with three
#: inputs all pure quadratics precede the cross terms.
BASIS_EXPONENTS = {
    1: ((0,), (1,), (2,)),
    2: ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)),
    3: (
        (0, 0, 0),
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (2, 0, 0), (0, 2, 0), (0, 0, 2),
        (1, 1, 0), (1, 0, 1), (0, 1, 1),
    ),
}

N_COEFFS = {n: len(exps) for n, exps in BASIS_EXPONENTS.items()}


def basis(n_vars: int, x) -> tuple:
    """Quadratic monomial basis evaluated at x, in coefficient order."""
    if n_vars not in BASIS_EXPONENTS:
        raise InvalidInputError(f"n_vars must be 1, 2 or 3, got {n_vars}")
    if len(x) != n_vars:
        raise InvalidInputError(f"expected {n_vars} inputs, got {len(x)}")
    if n_vars == 1:
        x1 = x[0]
        return (1.0, x1, x1 * x1)
    if n_vars == 2:
        x1, x2 = x
        return (1.0, x1, x2, x1 * x2, x1 * x1, x2 * x2)
    x1, x2, x3 = x
    return (
        1.0, x1, x2, x3,
        x1 * x1, x2 * x2, x3 * x3,
        x1 * x2, x1 * x3, x2 * x3,
    )


def monomial_name(exponents) -> str:
    """Human-readable name of a basis monomial, e.g. 'x1*x2' or 'x2^2'."""
    parts = []
    for k, e in enumerate(exponents, start=1):
        if e == 1:
            parts.append(f"x{k}")
        elif e >= 2:
            parts.append(f"x{k}^{e}")
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True)
class PolyMap:
    """A fitted quadratic performance map."""

    n_vars: int
    coeffs: tuple

    def __post_init__(self):
        if self.n_vars not in N_COEFFS:
            raise InvalidInputError(f"n_vars must be 1, 2 or 3, got {self.n_vars}")
        want = N_COEFFS[self.n_vars]
        if len(self.coeffs) != want:
            raise InvalidInputError(
                f"{self.n_vars}-input map needs {want} coefficients, got {len(self.coeffs)}"
            )
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))


def eval_map(pmap: PolyMap, x) -> float:
    """Evaluate a performance map at the raw inputs x."""
    b = basis(pmap.n_vars, x)
    c = pmap.coeffs
    # unrolled dot product; this sits inside the simulation hot loop
    total = 0.0
    for ck, bk in zip(c, b):
        total += ck * bk
    return total


@dataclass(frozen=True)
class Sample:
    """One steady-state operating point: inputs x and measured output y."""

    x: tuple
    y: float


@dataclass(frozen=True)
class FitResult:
    """A fitted map together with its residual diagnostics."""

    map: PolyMap
    objective: float          # weighted (relative) or plain sum of squares
    residuals: tuple          # y_i - model(x_i), raw units
    normalized: bool


def _coerce_samples(samples, n_vars):
    xs, ys = [], []
    for s in samples:
        if isinstance(s, Sample):
            x, y = s.x, s.y
        else:
            x, y = s
        x = tuple(float(v) for v in x)
        if len(x) != n_vars:
            raise InvalidInputError(
                f"sample has {len(x)} inputs, expected {n_vars}"
            )
        xs.append(x)
        ys.append(float(y))
    if not xs:
        raise InvalidInputError("no samples given")
    arr_x = np.asarray(xs, dtype=float)
    arr_y = np.asarray(ys, dtype=float)
    if not (np.isfinite(arr_x).all() and np.isfinite(arr_y).all()):
        raise InvalidSampleError("samples contain non-finite values")
    return arr_x, arr_y


def _centered_basis_to_raw(n_vars, mu, sigma):
    """Matrix M with raw_coeffs = M @ centered_coeffs.

    Each centered monomial prod_k ((x_k - mu_k) / sigma_k)^e_k expands into a
    combination of raw monomials of degree <= 2, which all belong to the same
    basis, so the conversion is exact.
    """
    exps = BASIS_EXPONENTS[n_vars]
    index = {e: i for i, e in enumerate(exps)}
    m = np.zeros((len(exps), len(exps)))
    for j, e in enumerate(exps):
        # expand variable by variable: polynomial as {exponent tuple: coeff}
        poly = {tuple([0] * n_vars): 1.0}
        for k, ek in enumerate(e):
            if ek == 0:
                continue
            if ek == 1:
                factor = {1: 1.0 / sigma[k], 0: -mu[k] / sigma[k]}
            else:  # ek == 2
                s2 = sigma[k] * sigma[k]
                factor = {2: 1.0 / s2, 1: -2.0 * mu[k] / s2, 0: mu[k] * mu[k] / s2}
            new = {}
            for mono, c in poly.items():
                for dk, fc in factor.items():
                    key = list(mono)
                    key[k] += dk
                    key = tuple(key)
                    new[key] = new.get(key, 0.0) + c * fc
            poly = new
        for mono, c in poly.items():
            m[index[mono], j] += c
    return m


def fit_map(samples, n_vars: int, normalize: bool = True,
            y_floor: float = 1e-9) -> FitResult:
    """Fit a quadratic performance map to steady-state samples.

    With ``normalize=True`` each row of the least squares system is weighted
    by 1/y_i, which minimises the summed squared relative deviation; the
    measured outputs must then stay away from zero (|y| > y_floor).
    """
    if n_vars not in N_COEFFS:
        raise InvalidInputError(f"n_vars must be 1, 2 or 3, got {n_vars}")
    x, y = _coerce_samples(samples, n_vars)
    k = N_COEFFS[n_vars]
    if len(y) < k:
        raise DegenerateFitError(
            f"{len(y)} samples cannot determine {k} coefficients"
        )
    if normalize and np.any(np.abs(y) <= y_floor):
        bad = int(np.argmax(np.abs(y) <= y_floor))
        raise InvalidSampleError(
            f"sample {bad} has |y| <= {y_floor}; relative weighting undefined"
        )

    mu = x.mean(axis=0)
    sigma = x.std(axis=0)
    sigma = np.where(sigma > 0.0, sigma, 1.0)
    z = (x - mu) / sigma

    design = np.asarray([basis(n_vars, row) for row in z])
    w = 1.0 / y if normalize else np.ones_like(y)
    a = design * w[:, None]
    rhs = y * w

    beta_z, _, rank, sv = np.linalg.lstsq(a, rhs, rcond=None)
    if rank < k:
        # name the monomial directions the data cannot distinguish
        _, _, vt = np.linalg.svd(a)
        null = vt[rank:]
        names = set()
        exps = BASIS_EXPONENTS[n_vars]
        for vec in null:
            top = np.abs(vec).max()
            for idx in np.nonzero(np.abs(vec) >= 0.3 * top)[0]:
                names.add(monomial_name(exps[idx]))
        raise DegenerateFitError(
            "design matrix is rank deficient; undetermined directions: "
            + ", ".join(sorted(names))
        )

    m = _centered_basis_to_raw(n_vars, mu, sigma)
    coeffs = m @ beta_z
    pmap = PolyMap(n_vars, tuple(coeffs))

    predicted = design @ beta_z
    residuals = y - predicted
    if normalize:
        objective = float(np.sum((residuals / y) ** 2))
    else:
        objective = float(np.sum(residuals ** 2))
    return FitResult(pmap, objective, tuple(residuals), normalize)


@dataclass(frozen=True)
class StepResponseFit:
    """First order lag parameters identified from a step test."""

    k_s: float           # static gain, output units per input unit
    t_s: float           # time constant, s
    sse: float = 0.0     # sum of squared residuals of the best fit
    indeterminate: bool = False  # True when the response never left zero


def _golden_section(f, lo: float, hi: float, rel_tol: float = 1e-3):
    """Minimise a scalar function on [lo, hi] by golden-section search."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_tol * max(1.0, 0.5 * (a + b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_step_response(series, u: float) -> StepResponseFit:
    """Identify gain and time constant of a first order lag from one step test.

    ``series`` holds (time_s, response) pairs starting at t = 0 from rest; u
    is the constant input step applied at t = 0.  For a candidate time
    constant the optimal gain has a closed form, so only the time constant is
    searched, over [1 s, 10 x test duration].
    """
    pts = np.asarray([(float(t), float(v)) for t, v in series], dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 5:
        raise InvalidInputError("a step test needs at least 5 samples")
    t, y = pts[:, 0], pts[:, 1]
    if u == 0.0:
        raise InvalidInputError("step input u must be nonzero")
    if t[0] != 0.0:
        raise InvalidInputError(f"step test must start at t=0, got t0={t[0]}")
    if np.any(np.diff(t) <= 0.0):
        raise InvalidInputError("step test times must be strictly increasing")
    peak = float(np.abs(y).max())
    if abs(y[0]) > 1e-9 + 1e-6 * peak:
        raise InvalidInputError("step test must start from rest (y(0) = 0)")
    if peak == 0.0:
        # flat zero response: zero gain, time constant unidentifiable
        return StepResponseFit(k_s=0.0, t_s=1.0, sse=0.0, indeterminate=True)

    duration = float(t[-1])

    def sse_for(t_s: float) -> float:
        g = 1.0 - np.exp(-t / t_s)
        denom = u * float(g @ g)
        k = float(y @ g) / denom if denom != 0.0 else 0.0
        r = y - k * u * g
        return float(r @ r)

    t_s = _golden_section(sse_for, 1.0, 10.0 * duration)
    g = 1.0 - np.exp(-t / t_s)
    k_s = float(y @ g) / (u * float(g @ g))
    r = y - k_s * u * g
    return StepResponseFit(k_s=k_s, t_s=t_s, sse=float(r @ r))


def fit_step_ensemble(series_list, u: float) -> StepResponseFit:
    """Average the parameters identified from repeated step tests.

    Commissioning runs repeat the step from a few different initial tank
    states; the reported lag is the mean of the individual fits.
    """
    fits = [fit_step_response(s, u) for s in series_list]
    if not fits:
        raise InvalidInputError("no step tests given")
    if any(f.indeterminate for f in fits):
        raise InvalidInputError("an all-zero step test cannot enter the ensemble")
    return StepResponseFit(
        k_s=float(np.mean([f.k_s for f in fits])),
        t_s=float(np.mean([f.t_s for f in fits])),
        sse=float(np.sum([f.sse for f in fits])),
    )

"""Decay-rate fitting, the gaussian/Kummer decomposition and the underflow audit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import specfun
from .errors import DivideByZero, InvalidParams, NonPositiveValues, WindowTooShort
from .ibvp import (
    BoundarySpec,
    ClosedForm,
    Grid1D,
    IBVPProblem,
    SolutionField,
    consonant_dirichlet,
    homogeneous_dirichlet,
    kummer_closed_form,
)

R2_THRESHOLD = 0.999
DEFAULT_WINDOW = (10.0, 100.0)
MIN_SAMPLES = 10
EPS = float(np.finfo(float).eps)


class DecayKind(str, Enum):
    ALGEBRAIC = "algebraic"
    EXPONENTIAL = "exponential"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class TimeSeries:
    """Samples u(t_i) of a probe."""

    t: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if t.ndim != 1 or t.shape != u.shape:
            raise InvalidParams("t and u must be matching 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise InvalidParams("sample times must increase")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_field(cls, f: SolutionField, x: float) -> "TimeSeries":
        return cls(f.times, f.probe(x))

    @classmethod
    def from_function(cls, fn: Callable, times: Sequence[float]) -> "TimeSeries":
        times = np.asarray(times, dtype=float)
        return cls(times, np.asarray([fn(t) for t in times], dtype=float))

    def window(self, lo: float, hi: float) -> "TimeSeries":
        keep = (self.t >= lo * (1 - 1e-12)) & (self.t <= hi * (1 + 1e-12))
        return TimeSeries(self.t[keep], self.u[keep])


def log_times(lo: float = DEFAULT_WINDOW[0], hi: float = DEFAULT_WINDOW[1], n: int = 60) -> np.ndarray:
    """Log-spaced sample times for a fit window."""
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class DecayFit:
    """Result of a decay fit.

    ``exponent`` is p in |u| ~ C (t - t_star)^p; ``rate`` is r in |u| ~ C e^{-r t}.
    Only the field matching ``kind`` is set (both for indeterminate fits).
    """

    kind: DecayKind
    r_squared: float
    window: tuple[float, float]
    prefactor: float = float("nan")
    exponent: float | None = None
    rate: float | None = None
    t_star: float | None = None
    alternatives: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        out = {"kind": self.kind.value, "r_squared": self.r_squared, "window": list(self.window),
               "prefactor": self.prefactor}
        if self.exponent is not None:
            out["exponent"] = self.exponent
        if self.rate is not None:
            out["rate"] = self.rate
        if self.t_star is not None:
            out["t_star"] = self.t_star
        return out


def _prepare(ts: TimeSeries, window) -> TimeSeries:
    lo, hi = window
    if not lo < hi:
        raise InvalidParams("window must satisfy t_min < t_max")
    sub = ts.window(lo, hi)
    if sub.t.size < MIN_SAMPLES:
        raise WindowTooShort(f"{sub.t.size} samples in window {window}, need {MIN_SAMPLES}")
    if np.any(sub.u == 0) or not np.all(np.isfinite(sub.u)):
        raise NonPositiveValues("|u| must be positive and finite throughout the window")
    return sub


def _linear_fit(X: np.ndarray, Y: np.ndarray) -> tuple[float, float, float, float]:
    """Slope, intercept, r^2 and residual sum of squares; r^2 = 0 for a flat target."""
    A = np.column_stack([X, np.ones_like(X)])
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    ss_res = float(np.sum((Y - (slope * X + intercept)) ** 2))
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    # Relative to the data scale, a flat target has no trend to explain.
    if ss_tot <= (1e-13 * max(1.0, float(np.max(np.abs(Y))))) ** 2 * Y.size:
        return float(slope), float(intercept), 0.0, ss_res
    return float(slope), float(intercept), max(0.0, 1.0 - ss_res / ss_tot), ss_res


def fit_algebraic(ts: TimeSeries, t_star: float, window=DEFAULT_WINDOW) -> DecayFit:
    """Least-squares slope of log|u| against log(t - t_star).

    Raises
    ------
    InvalidParams
        If the window starts before 10 |t_star| (outside the asymptotic regime).
    NonPositiveValues, WindowTooShort
    """
    if window[0] < 10 * abs(t_star):
        raise InvalidParams("fit window must start at t >= 10 |t_star|")
    sub = _prepare(ts, window)
    if np.any(sub.t - t_star <= 0):
        raise InvalidParams("t_star must precede every sample")
    slope, icpt, r2, _ = _linear_fit(np.log(sub.t - t_star), np.log(np.abs(sub.u)))
    return DecayFit(DecayKind.ALGEBRAIC, r2, tuple(window), math.exp(icpt), exponent=slope, t_star=t_star)


def search_t_star(ts: TimeSeries, window=DEFAULT_WINDOW, bounds: tuple[float, float] | None = None) -> DecayFit:
    """Algebraic fit with t_star chosen to minimise the log-log residual.

    The search runs over ``bounds`` (default (-t_min/10, 0)), keeping the
    asymptotic-window requirement satisfied.
    """
    sub = _prepare(ts, window)
    lo, hi = bounds if bounds is not None else (-window[0] / 10.0, 0.0)
    Y = np.log(np.abs(sub.u))

    def cost(ts_):
        return _linear_fit(np.log(sub.t - ts_), Y)[3]

    res = optimize.minimize_scalar(cost, bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
    return fit_algebraic(ts, float(res.x), window)


def fit_exponential(ts: TimeSeries, window=DEFAULT_WINDOW) -> DecayFit:
    """Least-squares slope of log|u| against t; rate = -slope."""
    sub = _prepare(ts, window)
    slope, icpt, r2, _ = _linear_fit(sub.t, np.log(np.abs(sub.u)))
    return DecayFit(DecayKind.EXPONENTIAL, r2, tuple(window), math.exp(icpt), rate=-slope)


def classify_decay(ts: TimeSeries, t_star: float, window=DEFAULT_WINDOW) -> DecayFit:
    """Fit both models and keep the better one; indeterminate below r^2 = 0.999."""
    alg = fit_algebraic(ts, t_star, window)
    exp_ = fit_exponential(ts, window)
    best = alg if alg.r_squared >= exp_.r_squared else exp_
    alts = {"algebraic": alg.as_dict(), "exponential": exp_.as_dict()}
    if best.r_squared < R2_THRESHOLD:
        return DecayFit(DecayKind.INDETERMINATE, best.r_squared, tuple(window), best.prefactor,
                        exponent=alg.exponent, rate=exp_.rate, t_star=t_star, alternatives=alts)
    return DecayFit(best.kind, best.r_squared, best.window, best.prefactor, best.exponent, best.rate,
                    best.t_star, alternatives=alts)


# ---------------------------------------------------------------------------
# decomposition into a consonant part and a homogeneous-Dirichlet part


def compatibility_constant(D: float) -> float:
    """c* solving e^{-D^2/2} = c* 1F1(-1/2, 1/2, D^2/4) e^{-D^2/4}.

    Raises
    ------
    DivideByZero
        If 1F1(-1/2, 1/2, D^2/4) vanishes (to rounding) at this D.
    """
    if not D > 0:
        raise InvalidParams("D must be positive")
    z = D * D / 4.0
    scaled = specfun.kummer_half_scaled(z)
    # Compare against the magnitude of the leading series terms to detect a root.
    if abs(scaled) <= 64 * EPS * math.exp(-z) * (1.0 + z):
        raise DivideByZero(f"1F1(-1/2, 1/2, {z:.6g}) vanishes; no compatible c* at D={D}")
    return math.exp(-D * D / 2.0) / scaled


@dataclass(frozen=True)
class Decomposition:
    """u = u1 + u2: ``consonant`` solves the problem with boundary-matched data in
    closed form; ``homogeneous`` carries the remaining initial data with zero
    Dirichlet data.
    """

    original: IBVPProblem
    consonant: ClosedForm
    consonant_problem: IBVPProblem
    homogeneous: IBVPProblem
    c_star: float | None = None

    def reassemble(self, homogeneous_field: SolutionField) -> SolutionField:
        """u2 (closed form) + u1 (supplied numerically) on the same grid and times."""
        grid = homogeneous_field.grid
        u2 = np.array([self.consonant(grid.x, t) for t in homogeneous_field.times])
        return SolutionField(grid, homogeneous_field.times, homogeneous_field.values + u2)


def decompose(initial: np.ndarray, exact: ClosedForm, grid: Grid1D, t_end: float, dt: float,
              c_star: float | None = None) -> Decomposition:
    """Generic split of a Dirichlet problem whose boundary data are the traces of `exact`.

    The original problem has initial data `initial` and boundary data
    exact(+-D, t).  The homogeneous part's initial data is formed by
    subtraction, so the two initial profiles sum exactly to `initial`.
    """
    initial = np.asarray(initial, dtype=float)
    left, right = consonant_dirichlet(exact, grid.D)
    u2_0 = np.asarray(exact(grid.x, 0.0), dtype=float)
    original = IBVPProblem(grid, initial, left, right, t_end, dt)
    consonant_problem = IBVPProblem(grid, u2_0, left, right, t_end, dt)
    zl, zr = homogeneous_dirichlet()
    homogeneous = IBVPProblem(grid, initial - u2_0, zl, zr, t_end, dt)
    return Decomposition(original, exact, consonant_problem, homogeneous, c_star)


def build_decomposition(D: float, n: int = 401, t_end: float = 5.0, dt: float = 1e-3) -> Decomposition:
    """Gaussian initial data e^{-x^2/2} with boundary data from the c* Kummer mode."""
    c = compatibility_constant(D)
    grid = Grid1D(D, n)
    return decompose(np.exp(-0.5 * grid.x**2), kummer_closed_form(c), grid, t_end, dt, c_star=c)


# ---------------------------------------------------------------------------
# machine-precision caveat


@dataclass(frozen=True)
class UnderflowReport:
    flagged: bool
    max_boundary: float
    threshold: float
    horizon: float
    message: str

    def as_dict(self) -> dict:
        return {"flagged": self.flagged, "max_boundary": self.max_boundary, "threshold": self.threshold,
                "horizon": self.horizon, "message": self.message}


def underflow_audit(boundary: tuple[BoundarySpec, BoundarySpec], horizon: float, initial_max: float = 1.0,
                    samples: int = 4001) -> UnderflowReport:
    """Flag boundary data that are negligible next to the initial data over [0, horizon].

    The threshold is 1e3 * machine epsilon * max|initial|.  Data below it are
    numerically indistinguishable from zero, so the run is effectively a
    homogeneous Dirichlet problem.
    """
    ts = np.unique(np.concatenate([np.linspace(0.0, horizon, samples),
                                   np.geomspace(max(horizon, 1e-12) * 1e-6, max(horizon, 1e-12), samples)]))
    peak = max(float(np.max(np.abs(spec(ts)))) for spec in boundary)
    threshold = 1e3 * EPS * float(abs(initial_max))
    flagged = bool(peak < threshold)
    msg = ("boundary data below 1e3 eps max|u0|: the run is effectively homogeneous Dirichlet "
           "and algebraic decay may present as exponential") if flagged else "boundary data resolvable"
    return UnderflowReport(flagged, peak, threshold, float(horizon), msg)

"""Crank-Nicolson solver for u_t = u_xx on [-D, D] with time-dependent boundary data.

Dirichlet rows are overwritten with the boundary value at each new time
level.  Neumann and Robin conditions are imposed through a ghost node
eliminated with the centred second-order difference.  Each step is one
tridiagonal solve with the Thomas algorithm.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from numba import njit

from . import similarity as sim
from . import specfun
from .errors import InvalidParams, RobinSingular

log = logging.getLogger(__name__)

ROBIN_EPS = 1e-12


class AccuracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Grid1D:
    D: float
    n: int

    def __post_init__(self):
        if not self.D > 0:
            raise InvalidParams("D must be positive")
        if self.n < 3:
            raise InvalidParams("need at least 3 nodes")

    @property
    def dx(self) -> float:
        return 2.0 * self.D / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return -self.D + self.dx * np.arange(self.n)

    def index_of(self, x: float) -> int:
        """Nearest node to `x`."""
        return int(round((x + self.D) / self.dx))


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Kind(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"


_KIND_CODE = {Kind.DIRICHLET: 0, Kind.NEUMANN: 1, Kind.ROBIN: 2}


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary condition on one side.

    ``source`` maps an array of times to the prescribed data: the value for
    Dirichlet, u_x for Neumann, and the coefficient beta(t) of u_x = beta u for
    Robin.
    """

    side: Side
    kind: Kind
    source: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.source(np.asarray(t, dtype=float)), dtype=float)


def constant_boundary(side: Side, kind: Kind, value: float) -> BoundarySpec:
    return BoundarySpec(Side(side), Kind(kind), lambda t: np.full(np.shape(t), float(value)), f"constant {value}")


def tabulated_boundary(side: Side, kind: Kind, times: Sequence[float], values: Sequence[float]) -> BoundarySpec:
    """Linear interpolation in time; queries past the last sample clamp to it."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape or times.size < 1:
        raise InvalidParams("times and values must be matching 1-D sequences")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise InvalidParams("tabulated times must start at 0 and increase strictly")
    if not np.all(np.isfinite(values)):
        raise InvalidParams("tabulated values must be finite")

    def source(t):
        t = np.asarray(t, dtype=float)
        if np.any(t > times[-1]):
            warnings.warn(f"boundary table ends at t={times[-1]}; clamping", stacklevel=2)
        return np.interp(t, times, values)

    return BoundarySpec(Side(side), Kind(kind), source, "tabulated")


@dataclass(frozen=True)
class IBVPProblem:
    grid: Grid1D
    initial: np.ndarray
    left: BoundarySpec
    right: BoundarySpec
    t_end: float
    dt: float

    def __post_init__(self):
        initial = np.asarray(self.initial, dtype=float)
        if initial.shape != (self.grid.n,):
            raise InvalidParams("initial data must have one value per grid node")
        if not np.all(np.isfinite(initial)):
            raise InvalidParams("initial data must be finite")
        if not (self.t_end > 0 and self.dt > 0):
            raise InvalidParams("t_end and dt must be positive")
        if self.dt > self.t_end:
            raise InvalidParams("dt must not exceed t_end")
        if self.left.side is not Side.LEFT or self.right.side is not Side.RIGHT:
            raise InvalidParams("boundary specs are attached to the wrong sides")
        object.__setattr__(self, "initial", initial)

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.t_end / self.dt - 1e-9)))


@dataclass(frozen=True)
class SolutionField:
    """Sampled u(x, t); ``values[i, j]`` is u at ``times[i]``, node ``j``."""

    grid: Grid1D
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float).reshape(times.size, self.grid.n)
        if times.size and np.any(np.diff(times) <= 0):
            raise InvalidParams("times must increase")
        if not np.all(np.isfinite(values)):
            raise InvalidParams("field contains non-finite values")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def probe(self, x: float) -> np.ndarray:
        """Time series at the node nearest to `x`."""
        return self.values[:, self.grid.index_of(x)]

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.values[i]

    def to_csv(self, path) -> None:
        write_field_csv(path, self.grid.x, self.times, self.values)


def write_field_csv(path, x: np.ndarray, times: Iterable[float], values: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "u"])
        for t, row in zip(times, values):
            for xv, uv in zip(x, row):
                w.writerow([repr(float(t)), repr(float(xv)), repr(float(uv))])


@njit(cache=True)
def thomas(a, b, c, d):
    """Solve a tridiagonal system; `a` is the sub-diagonal (a[0] unused), `c` the super-diagonal."""
    n = d.size
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = c[0] / b[0]
    dp[0] = d[0] / b[0]
    for i in range(1, n):
        m = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / m
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


@njit(cache=True)
def _cn_march(u0, r, dx, lkind, rkind, ldata, rdata, record, out):
    n = u0.size
    u = u0.copy()
    a = np.empty(n)
    b = np.empty(n)
    c = np.empty(n)
    d = np.empty(n)
    nsteps = ldata.size - 1
    rec = 0
    if record.size > 0 and record[0] == 0:
        out[0, :] = u
        rec = 1
    for step in range(nsteps):
        for i in range(1, n - 1):
            a[i] = -r
            b[i] = 1.0 + 2.0 * r
            c[i] = -r
            d[i] = r * u[i - 1] + (1.0 - 2.0 * r) * u[i] + r * u[i + 1]
        a[0] = 0.0
        c[n - 1] = 0.0
        lo, ln = ldata[step], ldata[step + 1]
        ro, rn = rdata[step], rdata[step + 1]
        if lkind == 0:
            b[0] = 1.0
            c[0] = 0.0
            d[0] = ln
        elif lkind == 1:
            b[0] = 1.0 + 2.0 * r
            c[0] = -2.0 * r
            d[0] = (1.0 - 2.0 * r) * u[0] + 2.0 * r * u[1] - 2.0 * r * dx * (lo + ln)
        else:
            b[0] = 1.0 + 2.0 * r + 2.0 * r * dx * ln
            c[0] = -2.0 * r
            d[0] = (1.0 - 2.0 * r - 2.0 * r * dx * lo) * u[0] + 2.0 * r * u[1]
        if rkind == 0:
            a[n - 1] = 0.0
            b[n - 1] = 1.0
            d[n - 1] = rn
        elif rkind == 1:
            a[n - 1] = -2.0 * r
            b[n - 1] = 1.0 + 2.0 * r
            d[n - 1] = (1.0 - 2.0 * r) * u[n - 1] + 2.0 * r * u[n - 2] + 2.0 * r * dx * (ro + rn)
        else:
            a[n - 1] = -2.0 * r
            b[n - 1] = 1.0 + 2.0 * r - 2.0 * r * dx * rn
            d[n - 1] = (1.0 - 2.0 * r + 2.0 * r * dx * ro) * u[n - 1] + 2.0 * r * u[n - 2]
        u = thomas(a, b, c, d)
        if rec < record.size and record[rec] == step + 1:
            out[rec, :] = u
            rec += 1
    return out


def _record_steps(n_steps: int, dt: float, save_times, save_every) -> np.ndarray:
    if save_times is not None:
        steps = np.rint(np.asarray(save_times, dtype=float) / dt).astype(np.int64)
        steps = np.clip(steps, 0, n_steps)
        steps = np.unique(np.concatenate([[0], steps]))
    else:
        if save_every is None:
            save_every = max(1, n_steps // 1000)
        steps = np.arange(0, n_steps + 1, save_every, dtype=np.int64)
        if steps[-1] != n_steps:
            steps = np.append(steps, n_steps)
    return steps


def crank_nicolson_solve(p: IBVPProblem, save_times=None, save_every: int | None = None) -> SolutionField:
    """March the problem to ``t_end``.

    The step is ``t_end / ceil(t_end / dt)`` so the last level lands on
    ``t_end``.  Snapshots are kept at ``save_times`` (rounded to the nearest
    level) or every ``save_every`` steps; by default about a thousand evenly
    spaced levels plus t = 0 and t = t_end.
    """
    n_steps = p.n_steps
    dt = p.t_end / n_steps
    dx = p.grid.dx
    ratio = dt / dx**2
    if ratio > 100:
        warnings.warn(f"dt/dx^2 = {ratio:.3g} > 100; Crank-Nicolson is stable but inaccurate here", AccuracyWarning, stacklevel=2)
    levels = dt * np.arange(n_steps + 1)
    ldata = np.ascontiguousarray(p.left(levels), dtype=float)
    rdata = np.ascontiguousarray(p.right(levels), dtype=float)
    if ldata.shape != levels.shape or rdata.shape != levels.shape:
        raise InvalidParams("boundary sources must return one value per time")
    if not (np.all(np.isfinite(ldata)) and np.all(np.isfinite(rdata))):
        raise InvalidParams("boundary data must be finite")
    record = _record_steps(n_steps, dt, save_times, save_every)
    out = np.empty((record.size, p.grid.n))
    log.debug("CN solve: n=%d steps=%d dt=%g r=%g", p.grid.n, n_steps, dt, ratio)
    _cn_march(
        p.initial.astype(float), 0.5 * ratio, dx,
        _KIND_CODE[p.left.kind], _KIND_CODE[p.right.kind],
        ldata, rdata, record, out,
    )
    return SolutionField(p.grid, levels[record], out)


# ---------------------------------------------------------------------------
# closed-form solutions and the boundary data consonant with them


@dataclass(frozen=True)
class ClosedForm:
    """An exact solution u(x, t) of the heat equation, vectorised in x and t.

    ``u_x`` may be omitted, in which case a 1e-6 central difference is used.
    ``mode``/``t_star`` identify the self-similar profile when there is one
    (needed for Robin data).
    """

    name: str
    u: Callable
    u_x: Callable | None = None
    mode: sim.SelfSimilarMode | None = None
    t_star: float | None = None

    def __call__(self, x, t):
        return np.asarray(self.u(x, t), dtype=float)

    def derivative(self, x, t):
        if self.u_x is not None:
            return np.asarray(self.u_x(x, t), dtype=float)
        h = 1e-6
        return (self(np.asarray(x) + h, t) - self(np.asarray(x) - h, t)) / (2 * h)


def hermite_closed_form() -> ClosedForm:
    def u_x(x, t):
        s = 2.0 * np.asarray(t, dtype=float) + 1.0
        x = np.asarray(x, dtype=float)
        return s**-1.5 * np.exp(-(x**2) / (2 * s)) * (1.0 - x**2 / s)

    return ClosedForm("hermite1", sim.hermite_mode_exact, u_x, sim.SelfSimilarMode(1.0, 0.0, 1.0), -0.5)


def kummer_closed_form(c_star: float) -> ClosedForm:
    def u(x, t):
        return sim.kummer_mode_exact(x, t, c_star)

    def u_x(x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        s = t + 1.0
        z = (x**2 / (4.0 * s)).ravel()
        dz = specfun.kummer_half_scaled_dz(z)
        return c_star / s * np.asarray(dz).reshape(x.shape) * x / (2.0 * s)

    return ClosedForm(f"kummer c*={c_star:.12g}", u, u_x, sim.SelfSimilarMode(0.0, 1.0, 1.0), -1.0)


def gaussian_closed_form(t_star: float = -0.5) -> ClosedForm:
    def u(x, t):
        return sim.gaussian_exact(x, t, t_star)

    def u_x(x, t):
        s = np.asarray(t, dtype=float) - t_star
        return -np.asarray(x, dtype=float) / (2.0 * s) * sim.gaussian_exact(x, t, t_star)

    return ClosedForm("gaussian", u, u_x, sim.SelfSimilarMode(0.0, 1.0, 0.0), t_star)


def mode_sum_closed_form(msum: sim.ModeSum) -> ClosedForm:
    mode = msum.terms[0].mode if len(msum.terms) == 1 else None
    return ClosedForm("mode sum", lambda x, t: sim.mode_to_physical(msum, x, t), None, mode, msum.frame.t_star)


def zero_closed_form() -> ClosedForm:
    return ClosedForm("zero", lambda x, t: np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape),
                      lambda x, t: np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape))


def constant_closed_form(c: float) -> ClosedForm:
    return ClosedForm(f"constant {c}", lambda x, t: np.full(np.broadcast(np.asarray(x), np.asarray(t)).shape, float(c)),
                      lambda x, t: np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape))


def sine_mode_closed_form(D: float, n: int = 1) -> ClosedForm:
    """Eigenmode e^{-k^2 t} sin(k (x + D)), k = n pi / (2D), which vanishes at x = +-D."""
    k = n * math.pi / (2.0 * D)

    def u(x, t):
        return np.exp(-k * k * np.asarray(t, dtype=float)) * np.sin(k * (np.asarray(x, dtype=float) + D))

    def u_x(x, t):
        return k * np.exp(-k * k * np.asarray(t, dtype=float)) * np.cos(k * (np.asarray(x, dtype=float) + D))

    return ClosedForm(f"sine mode {n}", u, u_x)


def consonant_dirichlet(exact: ClosedForm, D: float) -> tuple[BoundarySpec, BoundarySpec]:
    """Dirichlet data equal to the exact solution at x = -D and x = D."""
    return (
        BoundarySpec(Side.LEFT, Kind.DIRICHLET, lambda t: exact(-D, t), f"{exact.name} at -D"),
        BoundarySpec(Side.RIGHT, Kind.DIRICHLET, lambda t: exact(D, t), f"{exact.name} at +D"),
    )


def consonant_neumann(exact: ClosedForm, D: float) -> tuple[BoundarySpec, BoundarySpec]:
    """Neumann data u_x of the exact solution at x = -D and x = D."""
    return (
        BoundarySpec(Side.LEFT, Kind.NEUMANN, lambda t: exact.derivative(-D, t), f"{exact.name} u_x at -D"),
        BoundarySpec(Side.RIGHT, Kind.NEUMANN, lambda t: exact.derivative(D, t), f"{exact.name} u_x at +D"),
    )


def robin_coefficient(mode: sim.SelfSimilarMode, x: float, t, t_star: float) -> np.ndarray:
    """beta(t) with u_x(x, t) = beta(t) u(x, t) for a single self-similar mode.

    beta = w'(eta) / w(eta) / sqrt(2 (t - t_star)),  eta = x / sqrt(2 (t - t_star)).
    """
    s = np.asarray(t, dtype=float) - t_star
    width = np.sqrt(2.0 * s)
    eta = x / width
    w = np.asarray(sim.stationary_profile(mode, eta))
    if np.any(np.abs(w) < ROBIN_EPS):
        bad = np.atleast_1d(np.asarray(t, dtype=float))[np.atleast_1d(np.abs(w) < ROBIN_EPS)][0]
        raise RobinSingular(f"profile vanishes at the boundary (x={x}, t={bad:.6g})")
    wp = np.asarray(sim.profile_derivative(mode, eta))
    return wp / w / width


def consonant_robin(exact: ClosedForm | sim.SelfSimilarMode, D: float, t_star: float | None = None,
                    horizon: float | None = None) -> tuple[BoundarySpec, BoundarySpec]:
    """Robin data consonant with a single self-similar mode.

    If `horizon` is given the profile is sampled on [0, horizon] right away
    and :class:`RobinSingular` is raised if it comes within 1e-12 of zero at
    either boundary.
    """
    if isinstance(exact, ClosedForm):
        mode = exact.mode
        t_star = exact.t_star if t_star is None else t_star
    else:
        mode = exact
    if mode is None or t_star is None:
        raise InvalidParams("Robin data need a single-mode solution and its t_star")
    if horizon is not None:
        ts = np.concatenate([np.linspace(0.0, min(horizon, 1.0), 101), np.geomspace(1.0, max(horizon, 1.0), 400)])
        ts = ts[ts <= horizon]
        robin_coefficient(mode, -D, ts, t_star)
        robin_coefficient(mode, D, ts, t_star)
    return (
        BoundarySpec(Side.LEFT, Kind.ROBIN, lambda t: robin_coefficient(mode, -D, t, t_star), "robin at -D"),
        BoundarySpec(Side.RIGHT, Kind.ROBIN, lambda t: robin_coefficient(mode, D, t, t_star), "robin at +D"),
    )


def homogeneous_dirichlet() -> tuple[BoundarySpec, BoundarySpec]:
    return constant_boundary(Side.LEFT, Kind.DIRICHLET, 0.0), constant_boundary(Side.RIGHT, Kind.DIRICHLET, 0.0)


def compatibility_check(p: IBVPProblem) -> tuple[float, float]:
    """Mismatch between boundary data and initial data at t = 0, per side.

    Dirichlet compares values; Neumann and Robin compare the prescribed
    derivative with a one-sided second-order difference of the initial data.
    """
    u0, dx = p.initial, p.grid.dx
    slope_l = (-3 * u0[0] + 4 * u0[1] - u0[2]) / (2 * dx)
    slope_r = (3 * u0[-1] - 4 * u0[-2] + u0[-3]) / (2 * dx)

    def residual(spec: BoundarySpec, value: float, slope: float) -> float:
        data = float(spec(np.array([0.0]))[0])
        if spec.kind is Kind.DIRICHLET:
            return abs(data - value)
        if spec.kind is Kind.NEUMANN:
            return abs(data - slope)
        return abs(data * value - slope)

    return residual(p.left, u0[0], slope_l), residual(p.right, u0[-1], slope_r)


@dataclass(frozen=True)
class MassSeries:
    t: np.ndarray
    M: np.ndarray
    dM_dt: np.ndarray
    flux: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return np.abs(self.dM_dt - self.flux)

    def rows(self) -> list[tuple[float, float, float, float]]:
        return list(zip(self.t.tolist(), self.M.tolist(), self.dM_dt.tolist(), self.flux.tolist()))


def mass_series(f: SolutionField) -> MassSeries:
    """Mass M(t), its time derivative and the boundary flux u_x(D) - u_x(-D)."""
    dx = f.grid.dx
    u = f.values
    M = dx * (u.sum(axis=1) - 0.5 * (u[:, 0] + u[:, -1]))
    if f.times.size >= 3:
        dM = np.gradient(M, f.times, edge_order=2)
    elif f.times.size == 2:
        dM = np.full(2, (M[1] - M[0]) / (f.times[1] - f.times[0]))
    else:
        dM = np.zeros_like(M)
    ux_left = (-3 * u[:, 0] + 4 * u[:, 1] - u[:, 2]) / (2 * dx)
    ux_right = (3 * u[:, -1] - 4 * u[:, -2] + u[:, -3]) / (2 * dx)
    return MassSeries(f.times.copy(), M, dM, ux_right - ux_left)


def problem_from_closed_form(exact: ClosedForm, grid: Grid1D, t_end: float, dt: float,
                             kind: Kind = Kind.DIRICHLET) -> IBVPProblem:
    """IBVP whose initial data and boundary data both come from `exact`."""
    make = {Kind.DIRICHLET: consonant_dirichlet, Kind.NEUMANN: consonant_neumann,
            Kind.ROBIN: consonant_robin}[Kind(kind)]
    left, right = make(exact, grid.D)
    return IBVPProblem(grid, exact(grid.x, 0.0), left, right, t_end, dt)


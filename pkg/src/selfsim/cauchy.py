"""Whole-line Cauchy problem by direct quadrature of the heat-kernel convolution.

    u(x, t) = (4 pi t)^(-1/2) int exp(-(x - y)^2 / (4t)) f(y) dy

Used as the reference solution for consonant boundary problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from . import similarity as sim
from .errors import DomainError, InvalidParams, QuadratureError
from .ibvp import Grid1D, SolutionField

ABS_TOL = 1e-10
TRUNCATION = 1e-14
KERNEL_WIDTHS = 8.0
# QUADPACK subinterval budget; 2**20 bisections would be the depth-20 cap, far
# more than any smooth integrand here needs.
MAX_SUBINTERVALS = 2000
NODES_PER_CALL = 100


@dataclass(frozen=True)
class InitialData:
    """Initial profile f with effective support [-R, R].

    Build with :meth:`preset` or :meth:`tabulated`.
    """

    kind: str
    f: Callable[[np.ndarray], np.ndarray]
    R: float
    name: str = ""
    nodes: np.ndarray | None = None
    values: np.ndarray | None = None

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.where(np.abs(y) <= self.R, self.f(y), 0.0)
        return float(out) if out.ndim == 0 else out

    @classmethod
    def preset(cls, name: str, D: float = 1.0) -> "InitialData":
        """``gaussian`` e^{-x^2/2}, ``hermite1`` x e^{-x^2/2}, or ``kummer_c_star``.

        The Kummer preset is c* 1F1(-1/2, 1/2, x^2/4) e^{-x^2/4} with c* fixed
        by matching e^{-D^2/2} at x = D.  It decays only like 1/x^2, so its
        truncation radius is large.
        """
        if name == "gaussian":
            f = lambda y: np.exp(-0.5 * y**2)
        elif name == "hermite1":
            f = lambda y: y * np.exp(-0.5 * y**2)
        elif name == "kummer_c_star":
            from .analysis import compatibility_constant

            c = compatibility_constant(D)
            f = lambda y: sim.kummer_mode_exact(y, 0.0, c)
        else:
            raise InvalidParams(f"unknown preset {name!r}")
        R = _truncation_radius(f)
        return cls("closed_form_preset", f, R, name)

    @classmethod
    def tabulated(cls, nodes: Sequence[float], values: Sequence[float]) -> "InitialData":
        """Piecewise-linear data, zero outside the node range."""
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise InvalidParams("nodes and values must be matching 1-D arrays")
        if np.any(np.diff(nodes) <= 0):
            raise InvalidParams("nodes must increase strictly")
        if not np.all(np.isfinite(values)):
            raise InvalidParams("values must be finite")
        lo, hi = nodes[0], nodes[-1]
        f = lambda y: np.interp(y, nodes, values, left=0.0, right=0.0)
        return cls("tabulated", f, float(max(abs(lo), abs(hi))), "tabulated", nodes, values)

    @classmethod
    def zero(cls) -> "InitialData":
        return cls("closed_form_preset", lambda y: np.zeros_like(np.asarray(y, dtype=float)), 1.0, "zero")


def _truncation_radius(f) -> float:
    """Smallest R (to 1%) beyond which |f| <= 1e-14 max|f|, for profiles decaying from the origin."""
    ys = np.linspace(0.0, 10.0, 2001)
    peak = float(np.max(np.abs(f(ys))))
    if peak == 0.0:
        return 1.0
    threshold = TRUNCATION * peak
    hi = 10.0
    while abs(float(f(np.array([hi]))[0])) > threshold:
        hi *= 2.0
        if hi > 1e12:
            raise InvalidParams("initial data does not decay fast enough to truncate")
    lo = hi / 2.0 if hi > 10.0 else 0.0
    g = lambda r: math.log(abs(float(f(np.array([r]))[0])) + 1e-300) - math.log(threshold)
    if g(lo) <= 0:
        return hi
    return optimize.brentq(g, lo, hi, xtol=1e-6 * hi) * 1.01


def effective_radius(f: InitialData, t: float) -> float:
    """Half-width outside which u(., t) is negligible."""
    return f.R + KERNEL_WIDTHS * math.sqrt(4.0 * t)


def heat_kernel_solve(f: InitialData, x: float, t: float) -> float:
    """u(x, t) for the whole-line problem with initial data `f`.

    At t = 0 this returns f(x).  The integration range is clipped to the
    kernel window x +/- 8 sqrt(4t) inside [-R_eff, R_eff].
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return float(f(x))
    half = KERNEL_WIDTHS * math.sqrt(4.0 * t)
    lo = max(x - half, -f.R)
    hi = min(x + half, f.R)
    if lo >= hi:
        return 0.0
    norm = 1.0 / math.sqrt(4.0 * math.pi * t)

    def integrand(y):
        return math.exp(-((x - y) ** 2) / (4.0 * t)) * f(y)

    points = [p for p in (x, 0.0) if lo < p < hi]
    if f.nodes is None:
        return norm * _quad(integrand, lo, hi, points, ABS_TOL / norm)
    # Interpolated data have a kink at every node; give QUADPACK all of them,
    # a bounded number per call.
    inside = f.nodes[(f.nodes > lo) & (f.nodes < hi)]
    cuts = np.concatenate([[lo], inside[NODES_PER_CALL::NODES_PER_CALL], [hi]])
    pieces = len(cuts) - 1
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        local = [p for p in points + inside[(inside > a) & (inside < b)].tolist() if a < p < b]
        total += _quad(integrand, a, b, local, ABS_TOL / norm / pieces)
    return norm * total


def _quad(fn, lo, hi, points, tol) -> float:
    kwargs = dict(epsabs=tol, epsrel=0.0, limit=MAX_SUBINTERVALS, full_output=1)
    if points:
        kwargs["points"] = sorted(set(points))
    res = integrate.quad(fn, lo, hi, **kwargs)
    # A fourth entry is QUADPACK's warning message.
    if len(res) > 3 and res[1] > 10 * tol:
        raise QuadratureError(f"heat-kernel quadrature did not converge: {res[3]}")
    return res[0]


def sample_cauchy_field(f: InitialData, grid: Grid1D, times: Sequence[float]) -> SolutionField:
    """Tabulate u on the grid nodes at the given (positive) times."""
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise DomainError("sample times must be positive")
    values = np.array([[heat_kernel_solve(f, x, t) for x in grid.x] for t in times]).reshape(times.size, grid.n)
    return SolutionField(grid, times, values)


def mass(f: InitialData, t: float) -> float:
    """Integral of u(., t) over the line (nested quadrature)."""
    if t == 0:
        lo, hi = -f.R, f.R
        return integrate.quad(lambda y: float(f(y)), lo, hi, points=[0.0], limit=MAX_SUBINTERVALS, epsabs=1e-12)[0]
    reff = effective_radius(f, t)
    return integrate.quad(lambda x: heat_kernel_solve(f, x, t), -reff, reff, points=[0.0],
                          limit=MAX_SUBINTERVALS, epsabs=1e-11)[0]

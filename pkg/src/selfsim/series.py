"""Sine-series solution of the Dirichlet problem on [-D, D].

For u(-D, t) = g(t), u(D, t) = h(t) and k_n = n pi / (2D),

    u = (1/D) sum_n e^{-k_n^2 t} [ u0_hat(k_n) + k_n (g~(k_n^2, t) - (-1)^n h~(k_n^2, t)) ] sin(k_n (x + D))

with the sine transform u0_hat(k) = int_{-D}^{D} sin(k (x + D)) u0(x) dx and
g~(k^2, t) = int_0^t e^{k^2 s} g(s) ds.  The product e^{-k^2 t} g~ is always
formed as int_0^t e^{-k^2 (t - s)} g(s) ds so nothing overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import Overflow

QUAD_TOL = 1e-13
BoundarySource = Callable[[np.ndarray], np.ndarray]


def sine_transform(u0, k: float, D: float) -> float:
    """int_{-D}^{D} sin(k (x + D)) u0(x) dx.

    `u0` is either a callable (adaptive quadrature) or an array of values on
    an odd number of equispaced nodes spanning [-D, D] (composite Simpson).
    """
    if callable(u0):
        # sin(k(x + D)) = cos(kD) sin(kx) + sin(kD) cos(kx); QUADPACK's
        # Fourier-weighted rule keeps large k cheap and accurate.
        f = lambda x: float(u0(x))
        opts = dict(epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=500, wvar=k)
        s_part = integrate.quad(f, -D, D, weight="sin", **opts)[0]
        c_part = integrate.quad(f, -D, D, weight="cos", **opts)[0]
        return math.cos(k * D) * s_part + math.sin(k * D) * c_part
    values = np.asarray(u0, dtype=float)
    x = np.linspace(-D, D, values.size)
    return float(integrate.simpson(np.sin(k * (x + D)) * values, x=x))


def boundary_transform(g: BoundarySource | None, k2: float, t: float, paired: bool = True) -> float:
    """Time transform of boundary data.

    With ``paired=True`` (the default) returns e^{-k^2 t} g~(k^2, t), i.e.
    int_0^t e^{-k^2 (t - s)} g(s) ds, which stays bounded.  ``paired=False``
    returns the raw g~(k^2, t) = int_0^t e^{k^2 s} g(s) ds and refuses
    k^2 t > 700.
    """
    if g is None or t == 0.0:
        return 0.0
    if not paired and k2 * t > 700:
        raise Overflow(f"raw boundary transform overflows for k^2 t = {k2 * t:.3g}")
    # The paired integrand is concentrated within ~1/k^2 of s = t.
    span = t if k2 <= 0 else min(t, 50.0 / k2)
    fn = lambda sig: math.exp(-k2 * sig) * float(g(np.array([t - sig]))[0])
    pieces = [(0.0, span)]
    if span < t:
        pieces.append((span, t))
    total = 0.0
    for lo, hi in pieces:
        val, _ = integrate.quad(fn, lo, hi, epsabs=QUAD_TOL * 1e-2, epsrel=QUAD_TOL, limit=500)
        total += val
    return total if paired else total * math.exp(k2 * t)


@dataclass(frozen=True)
class SineSeriesSolution:
    """Truncated sine-series representation.

    The boundary terms converge only like 1/k_n.  With ``accelerate`` their
    large-k expansion

        k E_n = (g(t) - (-1)^n h(t)) / k_n - (g'(t) - (-1)^n h'(t)) / k_n^3 + O(k_n^-5)

    is summed over all n in closed form (the first part is the linear
    interpolant of the boundary values, the second a cubic in x) and only
    the remainder is truncated.  With homogeneous data both modes coincide.
    """

    D: float
    N: int
    u0_hat: np.ndarray
    g0: BoundarySource | None = None
    h0: BoundarySource | None = None
    accelerate: bool = True

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        u0_hat = np.asarray(self.u0_hat, dtype=float)
        if u0_hat.shape != (self.N,):
            raise ValueError("u0_hat must have N entries")
        object.__setattr__(self, "u0_hat", u0_hat)

    @classmethod
    def from_initial(cls, u0, D: float, N: int, g0: BoundarySource | None = None,
                     h0: BoundarySource | None = None, accelerate: bool = True) -> "SineSeriesSolution":
        ks = np.arange(1, N + 1) * math.pi / (2.0 * D)
        u0_hat = np.array([sine_transform(u0, k, D) for k in ks])
        return cls(D, N, u0_hat, g0, h0, accelerate)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(1, self.N + 1) * math.pi / (2.0 * self.D)

    def coefficients(self, t: float) -> np.ndarray:
        """Per-mode amplitudes c_n(t); u = (1/D) sum c_n sin(k_n (x + D)) (+ interpolant if accelerated)."""
        ks = self.wavenumbers
        signs = (-1.0) ** np.arange(1, self.N + 1)
        coef = np.exp(-ks**2 * t) * self.u0_hat
        if self.g0 is None and self.h0 is None:
            return coef
        eg = np.array([boundary_transform(self.g0, k * k, t) for k in ks])
        eh = np.array([boundary_transform(self.h0, k * k, t) for k in ks])
        coef = coef + ks * (eg - signs * eh)
        if self.accelerate:
            gt, ht = _value(self.g0, t), _value(self.h0, t)
            dg, dh = _rate(self.g0, t), _rate(self.h0, t)
            coef = coef - (gt - signs * ht) / ks + (dg - signs * dh) / ks**3
        return coef

    def boundary_closure(self, x, t: float):
        """Closed-form sum over all n of the subtracted large-k boundary terms."""
        x = np.asarray(x, dtype=float)
        gt, ht = _value(self.g0, t), _value(self.h0, t)
        dg, dh = _rate(self.g0, t), _rate(self.h0, t)
        theta = math.pi * (x + self.D) / (2.0 * self.D)
        linear = gt * (self.D - x) / (2 * self.D) + ht * (x + self.D) / (2 * self.D)
        cubic = (2.0 * self.D / math.pi) ** 3 / self.D * (dg * _clausen3(theta) - dh * _clausen3(theta + math.pi))
        return linear - cubic

    def __call__(self, x, t: float):
        return series_solution(self, x, t)


def series_solution(s: SineSeriesSolution, x, t: float):
    """Evaluate the truncated series at points `x` (|x| <= D) and time t >= 0."""
    x = np.asarray(x, dtype=float)
    coef = s.coefficients(t)
    modes = np.sin(np.multiply.outer(x + s.D, s.wavenumbers))
    out = modes @ coef / s.D
    if s.accelerate and (s.g0 is not None or s.h0 is not None):
        out = out + s.boundary_closure(x, t)
    return float(out) if np.ndim(out) == 0 else out


def _value(g: BoundarySource | None, t: float) -> float:
    return 0.0 if g is None else float(g(np.array([t]))[0])


def _rate(g: BoundarySource | None, t: float) -> float:
    """g'(t) by second-order differences (one-sided near t = 0)."""
    if g is None:
        return 0.0
    h = 1e-4 * max(1.0, t)
    if t >= h:
        v = g(np.array([t - h, t + h]))
        return float(v[1] - v[0]) / (2 * h)
    v = g(np.array([t, t + h, t + 2 * h]))
    return float(-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)


def _clausen3(theta):
    """sum_{n>=1} sin(n theta) / n^3 for theta in [0, 2 pi]."""
    return (theta**3 - 3 * math.pi * theta**2 + 2 * math.pi**2 * theta) / 12.0


def dirichlet_series_0D(u0: Callable, D: float, N: int, x, t: float):
    """Homogeneous Dirichlet problem on [0, D]: sum_n A_n e^{-(n pi/D)^2 t} sin(n pi x / D)."""
    x = np.asarray(x, dtype=float)
    n = np.arange(1, N + 1)
    A = np.array([
        2.0 / D * integrate.quad(lambda y: math.sin(m * math.pi * y / D) * float(u0(y)), 0.0, D,
                                 epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=500)[0]
        for m in n
    ])
    k = n * math.pi / D
    out = np.sin(np.multiply.outer(x, k)) @ (A * np.exp(-k**2 * t))
    return float(out) if np.ndim(out) == 0 else out

"""Scaling frame, stationary self-similar profiles and finite mode sums.

With the width growth rate G fixed to one, a self-similar solution is
u(x, t) = A(t) w(x / L(t)) where L(t) = sqrt(2 (t - t_star)) and the profile w
solves the steady ODE

    w'' + xi w' - b w = 0.

Its solutions are exp(-xi^2/2) [c1 H_nu(xi/sqrt2) + c2 1F1(-nu/2, 1/2, xi^2/2)]
with nu = -(b + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import specfun
from .errors import DomainError, InvalidParams, UnsupportedBranch

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ScalingFrame:
    """Rescaling parameters (G, b, L0, A0, t_star).

    Direct construction accepts any G > 0 so the frame maps can be exercised
    in general; use :func:`make_frame` in application code, which pins G = 1.
    """

    b: float
    t_star: float = -0.5
    L0: float = 1.0
    A0: float = 1.0
    G: float = 1.0

    def __post_init__(self):
        if not self.G > 0:
            raise InvalidParams("G must be positive")
        if not self.L0 > 0:
            raise InvalidParams("L0 must be positive")
        if not self.t_star < 0:
            raise InvalidParams("t_star must be negative")

    @property
    def nu(self) -> float:
        return -(self.b + 1.0)


def make_frame(b: float, t_star: float = -0.5, L0: float = 1.0, A0: float = 1.0) -> ScalingFrame:
    """Public constructor: the growth rate is always one."""
    return ScalingFrame(b=b, t_star=t_star, L0=L0, A0=A0, G=1.0)


def _elapsed(frame: ScalingFrame, t):
    s = np.asarray(t, dtype=float) - frame.t_star
    if np.any(s <= 0):
        raise DomainError(f"t must exceed t_star={frame.t_star}")
    return s


def _base(frame: ScalingFrame, t):
    return 2.0 * frame.G / frame.L0**2 * _elapsed(frame, t)


def tau_of_t(frame: ScalingFrame, t):
    """Rescaled time: exp(tau) = [2G/L0^2 (t - t_star)]^(1/(2G))."""
    out = np.log(_base(frame, t)) / (2.0 * frame.G)
    return float(out) if np.ndim(out) == 0 else out


def t_of_tau(frame: ScalingFrame, tau):
    out = frame.t_star + frame.L0**2 / (2.0 * frame.G) * np.exp(2.0 * frame.G * np.asarray(tau, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def amplitude_of_t(frame: ScalingFrame, t):
    out = frame.A0 * _base(frame, t) ** (frame.b / (2.0 * frame.G))
    return float(out) if np.ndim(out) == 0 else out


def width_of_t(frame: ScalingFrame, t):
    """L(t) = L0 exp(G tau(t))."""
    out = frame.L0 * _base(frame, t) ** 0.5
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SelfSimilarMode:
    """One stationary profile.

    ``second_branch`` replaces the Hermite part, which coincides with the
    Kummer part at even nu, by the closed-form Erfi solution; ``c1`` then
    weights that solution.  Only nu = 0 and nu = 2 are available.
    """

    c1: float
    c2: float
    nu: float
    second_branch: bool = False

    def __post_init__(self):
        if self.second_branch and self.nu not in (0, 2):
            raise UnsupportedBranch(f"second branch only available for nu in {{0, 2}}, got {self.nu}")

    @property
    def b(self) -> float:
        return -(self.nu + 1.0)


def stationary_profile(mode: SelfSimilarMode, xi):
    """Evaluate w(xi) for a mode; accepts scalars or arrays."""
    xi = np.asarray(xi, dtype=float)
    if mode.second_branch:
        # exp(-xi^2/2) Erfi(xi/sqrt2) is the scaled erfi at xi/sqrt2.
        e = specfun.erfi_scaled(xi / SQRT2)
        if mode.nu == 0:
            second = e
        else:
            second = 2.0 * xi + math.sqrt(2.0 * math.pi) * (1.0 - xi**2) * e
        out = mode.c1 * second
        if mode.c2:
            out = out + mode.c2 * specfun.kummer_1f1_scaled(-mode.nu / 2.0, 0.5, xi**2 / 2.0)
        return float(out) if np.ndim(out) == 0 else out
    out = np.zeros_like(xi)
    if mode.c1:
        out = out + mode.c1 * specfun.hermite_nu_scaled(mode.nu, xi / SQRT2)
    if mode.c2:
        out = out + mode.c2 * specfun.kummer_1f1_scaled(-mode.nu / 2.0, 0.5, xi**2 / 2.0)
    return float(out) if out.ndim == 0 else out


def profile_derivative(mode: SelfSimilarMode, xi, h: float = 1e-6):
    """Central-difference w'(xi)."""
    xi = np.asarray(xi, dtype=float)
    out = (np.asarray(stationary_profile(mode, xi + h)) - np.asarray(stationary_profile(mode, xi - h))) / (2 * h)
    return float(out) if out.ndim == 0 else out


def stationary_residual(mode: SelfSimilarMode, b: float, xi, h: float = 3e-4):
    """Finite-difference residual of w'' + xi w' - b w at `xi`.

    The default step balances the O(h^2) truncation error against rounding
    in the profile values, which the second difference amplifies by 1/h^2.
    """
    if not 1e-6 <= h <= 1e-2:
        raise InvalidParams("h must lie in [1e-6, 1e-2]")
    xi = np.asarray(xi, dtype=float)
    wm = np.asarray(stationary_profile(mode, xi - h))
    w0 = np.asarray(stationary_profile(mode, xi))
    wp = np.asarray(stationary_profile(mode, xi + h))
    out = (wp - 2 * w0 + wm) / h**2 + xi * (wp - wm) / (2 * h) - b * w0
    return float(out) if out.ndim == 0 else out


class ModeClass(str, Enum):
    BOUNDED_NONINTEGRABLE = "bounded_nonintegrable"
    INTEGRABLE = "integrable"
    UNBOUNDED = "unbounded"


def classify_mode(b_tilde: float) -> ModeClass:
    if b_tilde >= 0:
        return ModeClass.UNBOUNDED
    if b_tilde >= -1:
        return ModeClass.BOUNDED_NONINTEGRABLE
    return ModeClass.INTEGRABLE


@dataclass(frozen=True)
class ModeTerm:
    lam: float
    mode: SelfSimilarMode


@dataclass(frozen=True)
class ModeSum:
    """Finite superposition of separated modes in a common frame.

    Each term's index must equal -(b - lambda + 1).
    """

    frame: ScalingFrame
    terms: tuple[ModeTerm, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            expected = -(self.frame.b - term.lam + 1.0)
            if not math.isclose(term.mode.nu, expected, rel_tol=1e-12, abs_tol=1e-12):
                raise InvalidParams(f"term with lambda={term.lam} needs nu={expected}, got {term.mode.nu}")

    @classmethod
    def single(cls, frame: ScalingFrame, lam: float, c1: float = 0.0, c2: float = 0.0) -> "ModeSum":
        nu = -(frame.b - lam + 1.0)
        return cls(frame, (ModeTerm(lam, SelfSimilarMode(c1, c2, nu)),))


def mode_to_physical(msum: ModeSum, x, t):
    """u(x, t) for a finite mode sum (G = 1).

    u = sum_j (t - t_star)^((b - lambda_j)/2) w_j(x / sqrt(2 (t - t_star)))

    which is the reconstruction formula with the Gaussian envelope folded
    into each profile.
    """
    s = _elapsed(msum.frame, t)
    x = np.asarray(x, dtype=float)
    xi = x / np.sqrt(2.0 * s)
    out = np.zeros(np.broadcast(x, s).shape)
    for term in msum.terms:
        b_tilde = msum.frame.b - term.lam
        out = out + s ** (b_tilde / 2.0) * np.asarray(stationary_profile(term.mode, xi))
    return float(out) if out.ndim == 0 else out


def hermite_mode_exact(x, t):
    """Closed form x (2t+1)^(-3/2) exp(-x^2 / (2(2t+1))) from initial data x exp(-x^2/2)."""
    x = np.asarray(x, dtype=float)
    s = 2.0 * np.asarray(t, dtype=float) + 1.0
    return x * s**-1.5 * np.exp(-(x**2) / (2.0 * s))


def kummer_mode_exact(x, t, c_star: float):
    """Closed form c* / (t+1) 1F1(-1/2, 1/2, x^2/(4(t+1))) exp(-x^2/(4(t+1)))."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    s = t + 1.0
    z = x**2 / (4.0 * s)
    out = c_star / s * np.asarray(specfun.kummer_half_scaled(z.ravel())).reshape(z.shape)
    return float(out) if out.ndim == 0 else out


def gaussian_exact(x, t, t_star: float = -0.5):
    """Unit-mass heat kernel (4 pi (t - t_star))^(-1/2) exp(-x^2 / (4 (t - t_star)))."""
    s = np.asarray(t, dtype=float) - t_star
    if np.any(s <= 0):
        raise DomainError("t must exceed t_star")
    return np.exp(-np.asarray(x, dtype=float) ** 2 / (4.0 * s)) / np.sqrt(4.0 * math.pi * s)


def hermite_mode_sum() -> ModeSum:
    """The closed form of :func:`hermite_mode_exact` written as a one-term sum."""
    frame = make_frame(b=-3.0, t_star=-0.5)
    return ModeSum.single(frame, lam=frame.b + 2.0, c1=2.0**-1.5)


def kummer_mode_sum(c_star: float) -> ModeSum:
    """The closed form of :func:`kummer_mode_exact` as a one-term sum (t_star = -1)."""
    frame = make_frame(b=-2.0, t_star=-1.0)
    return ModeSum.single(frame, lam=0.0, c2=c_star)


"""Unified-transform evaluation of the Dirichlet problem on [-D, D].

For u(-D, t) = g(t), u(D, t) = h(t) the solution is a real-line Fourier
integral of the initial data plus two contour integrals over the boundaries
of the upper and lower regions where Re k^2 < 0.  The contour terms are
rewritten here so that every exponential has modulus at most one:

    upper:  -e^{ik(x+D)} / (1 - q^2) [ -2ik E_g + 2ik q E_h + e^{-k^2 t} (q U+ - U-) ]
    lower:   e^{ik(x-D)} / (1 - p^2) [ -2ik p E_g + 2ik E_h + e^{-k^2 t} (p V+ - V-) ]

with q = e^{2ikD}, p = e^{-2ikD}, E_g(k^2, t) = int_0^t e^{-k^2 (t - s)} g(s) ds and
U+/- = int e^{ik(D -/+ x')} u0, V+ = int e^{-ik(D + x')} u0, V- = int e^{ik(x' - D)} u0.

The contours are deformed from the rays at pi/4 and 3pi/4 to rays at
``theta`` and pi - ``theta`` (theta < pi/4) so that e^{-k^2 t} decays along
them.  No singularity lies in between: the denominator vanishes only on the
real axis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContourError, InvalidParams, Overflow

log = logging.getLogger(__name__)

THETA = math.pi / 6
GL_NODES = 16
EXP_GUARD = 700.0
DECAY = 45.0  # e-folds kept before truncating any exponentially small factor
IMAG_TOL = 1e-8
IMAG_FAIL = 1e-6
# Beyond this |k^2| (and once e^{-k^2 t} is negligible) the boundary transform
# is replaced by its large-k expansion g/k^2 - g'/k^4 + g''/k^6.
ASYMPTOTIC_K2 = 2000.0

_X, _W = np.polynomial.legendre.leggauss(GL_NODES)
Source = Callable[[np.ndarray], np.ndarray]


def _gauss(breaks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on consecutive breakpoints."""
    a, b = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * _X
    weights = half * _W
    return nodes.ravel(), weights.ravel()


def _spatial_rule(D: float, kmax: float) -> tuple[np.ndarray, np.ndarray]:
    # About two radians of phase per panel at the largest wavenumber.
    panels = int(math.ceil(D * kmax)) + 4
    return _gauss(np.linspace(-D, D, panels + 1))


def _transform(u0, k: np.ndarray, offset: float, sign: float, D: float) -> np.ndarray:
    """int_{-D}^{D} exp(i k (offset + sign x')) u0(x') dx' for an array of k."""
    k = np.asarray(k, dtype=complex)
    if k.size == 0:
        return k.copy()
    xs, ws = _spatial_rule(D, float(np.max(np.abs(k))))
    fw = ws * np.asarray(u0(xs), dtype=float)
    out = np.empty(k.shape, dtype=complex)
    for lo in range(0, k.size, 2048):
        kk = k.ravel()[lo:lo + 2048]
        out.ravel()[lo:lo + 2048] = np.exp(1j * np.multiply.outer(kk, offset + sign * xs)) @ fw
    return out


def u0_hat(u0, k, D: float):
    """Finite Fourier transform int_{-D}^{D} e^{-ikx} u0(x) dx at complex k.

    Parameters
    ----------
    u0 : callable
        Vectorised initial profile on [-D, D].
    k : complex or array of complex
    D : float

    Raises
    ------
    Overflow
        If |Im k| D > 700.
    """
    k = np.asarray(k, dtype=complex)
    if np.any(np.abs(k.imag) * D > EXP_GUARD):
        raise Overflow("|Im k| D exceeds the exponent guard")
    out = _transform(u0, np.atleast_1d(k), 0.0, -1.0, D)
    return complex(out[0]) if k.ndim == 0 else out.reshape(k.shape)


def _sigma_rule(lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    # One panel on [0, lo], then geometric panels (ratio 1.25, width <= 0.25)
    # up to hi, so e^{-k^2 sigma} is resolved wherever it is not negligible.
    breaks = [hi]
    while breaks[-1] > lo:
        breaks.append(breaks[-1] / 1.25)
    breaks.append(0.0)
    breaks = np.array(breaks[::-1])
    fine = [breaks[:1]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        m = max(1, int(math.ceil((b - a) / 0.25)))
        fine.append(np.linspace(a, b, m + 1)[1:])
    return _gauss(np.concatenate(fine))


def _derivatives(g: Source, t: float) -> tuple[float, float, float]:
    h = 1e-3 * max(1.0, t)
    if t >= 2 * h:
        v = np.asarray(g(np.array([t - h, t, t + h])), dtype=float)
        return float(v[1]), (v[2] - v[0]) / (2 * h), (v[2] - 2 * v[1] + v[0]) / h**2
    v = np.asarray(g(np.array([t, t + h, t + 2 * h, t + 3 * h])), dtype=float)
    d1 = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    d2 = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
    return float(v[0]), d1, d2


def paired_boundary_transform(g: Source | None, k2, t: float) -> np.ndarray:
    """E(k^2, t) = int_0^t e^{-k^2 (t - s)} g(s) ds for complex k^2 with Re k^2 >= 0."""
    k2 = np.asarray(k2, dtype=complex)
    out = np.zeros(k2.shape, dtype=complex)
    if g is None:
        return out
    flat = k2.ravel()
    res = out.ravel()
    asym = (np.abs(flat) >= ASYMPTOTIC_K2) & (flat.real * t >= DECAY)
    if np.any(asym):
        g0, g1, g2 = _derivatives(g, t)
        inv = 1.0 / flat[asym]
        res[asym] = inv * (g0 - inv * (g1 - inv * g2))
    idx = np.flatnonzero(~asym)
    idx = idx[np.argsort(np.abs(flat[idx]))]
    for lo in range(0, idx.size, 256):
        sel = idx[lo:lo + 256]
        lam = flat[sel]
        # Past (DECAY + 5) / Re k^2 the kernel is negligible for the whole chunk.
        min_re = float(np.min(lam.real))
        hi = t if min_re <= 0 else min(t, (DECAY + 5) / min_re)
        sig, w = _sigma_rule(min(1e-3 / float(np.max(np.abs(lam))), 0.5 * hi), hi)
        gw = w * np.asarray(g(t - sig), dtype=float)
        res[sel] = np.exp(-np.multiply.outer(lam, sig)) @ gw
    return res.reshape(k2.shape)


@dataclass(frozen=True)
class ContourSpec:
    """One deformed boundary: an incoming ray, an arc of radius r0 and an outgoing ray.

    ``half`` is "upper" or "lower".  ``breaks`` are the panel radii along
    both rays (from r0 out to the truncation radius R_k); the arc carries
    ``arc_panels`` panels.
    """

    half: str
    r0: float
    breaks: tuple[float, ...]
    theta: float = THETA
    arc_panels: int = 4

    def __post_init__(self):
        if self.half not in ("upper", "lower"):
            raise InvalidParams("half must be 'upper' or 'lower'")
        if not self.r0 > 0:
            raise InvalidParams("r0 must be positive")
        if not 0 < self.theta < math.pi / 4:
            raise InvalidParams("ray angle must lie in (0, pi/4)")

    @property
    def R(self) -> float:
        return self.breaks[-1]

    @property
    def angles(self) -> tuple[float, float]:
        """(incoming, outgoing) ray angles."""
        if self.half == "upper":
            return math.pi - self.theta, self.theta
        return -self.theta, -(math.pi - self.theta)

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes k and oriented weights dk along the whole path."""
        r, w = _gauss(np.asarray(self.breaks))
        phi_in, phi_out = self.angles
        e_in, e_out = np.exp(1j * phi_in), np.exp(1j * phi_out)
        # Both arcs run clockwise; the reversed linspace makes the weights negative.
        psi, wpsi = _gauss(np.linspace(phi_in, phi_out, self.arc_panels + 1))
        k_arc = self.r0 * np.exp(1j * psi)
        ks = np.concatenate([r * e_in, k_arc, r * e_out])
        dk = np.concatenate([-w * e_in, 1j * k_arc * wpsi, w * e_out])
        return ks, dk


def _ray_breaks(r0: float, D: float, t: float, theta: float, slow: float) -> np.ndarray:
    """Panel radii: ~2 rad of phase per panel, geometric growth once only the slow term survives."""
    r_t = math.sqrt(DECAY / (t * math.cos(2 * theta)))
    r_fast = max(1.2 * r_t, DECAY / (D * math.sin(theta)), math.sqrt(ASYMPTOTIC_K2) * 1.05)
    r_end = max(r_fast, DECAY / (max(slow, 1e-12) * math.sin(theta)))
    r_end = min(r_end, 1e12)
    out = [r0]
    r = r0
    while r < r_end:
        if r < r_fast:
            rate = 2 * r * t * math.sin(2 * theta) * (r < 1.2 * r_t) + 6 * D
            nxt = min(r + min(2.0 / rate, 0.5 * r), r_fast)
        else:
            nxt = r + min(2.0 / (slow * math.cos(theta)), 0.5 * r)
        r = min(nxt, r_end)
        out.append(r)
    return np.array(out)


def default_contours(D: float, x: float, t: float, r0: float | None = None,
                     theta: float = THETA) -> tuple[ContourSpec, ContourSpec]:
    """Upper and lower contours for a probe (x, t); r0 defaults to pi/(8D)."""
    r0 = math.pi / (8 * D) if r0 is None else r0
    if not 0 < r0 < math.pi / (2 * D):
        raise InvalidParams("r0 must lie in (0, pi/(2D)) to stay clear of the denominator zeros")
    upper = ContourSpec("upper", r0, tuple(_ray_breaks(r0, D, t, theta, x + D)), theta)
    lower = ContourSpec("lower", r0, tuple(_ray_breaks(r0, D, t, theta, D - x)), theta)
    return upper, lower


@dataclass(frozen=True)
class UTMResult:
    """Values at the probe points with per-point imaginary residuals.

    ``parts`` holds the complex real-line, upper and lower contributions.
    """

    x: np.ndarray
    value: np.ndarray
    imag_residual: np.ndarray
    parts: dict

    @property
    def max_residual(self) -> float:
        return float(np.max(self.imag_residual, initial=0.0))


def _real_line(u0, D: float, xs: np.ndarray, t: float) -> np.ndarray:
    K = math.sqrt(DECAY / t)
    rate = 2 * K * t + 2 * D + float(np.max(np.abs(xs)))
    panels = int(math.ceil(2 * K * rate / 2.0)) + 2
    k, w = _gauss(np.linspace(-K, K, panels + 1))
    uh = _transform(u0, k, 0.0, -1.0, D)
    return np.exp(1j * np.multiply.outer(xs, k)) @ (w * np.exp(-k * k * t) * uh) / (2 * math.pi)


def _contour_sum(spec: ContourSpec, u0, g, h, D: float, xs: np.ndarray, t: float) -> np.ndarray:
    k, dk = spec.nodes()
    k2 = k * k
    eg = paired_boundary_transform(g, k2, t)
    eh = paired_boundary_transform(h, k2, t)
    decay = np.zeros_like(k)
    live = k2.real * t < DECAY + 5
    decay[live] = np.exp(-k2[live] * t)
    kl = k[live]
    if spec.half == "upper":
        q = np.exp(2j * k * D)
        bracket = -2j * k * eg + 2j * k * q * eh
        if u0 is not None and kl.size:
            up = _transform(u0, kl, D, -1.0, D)
            um = _transform(u0, kl, D, 1.0, D)
            bracket[live] += decay[live] * (q[live] * up - um)
        weight = -bracket / (1 - q * q) * dk
        shift = xs + D
    else:
        p = np.exp(-2j * k * D)
        bracket = -2j * k * p * eg + 2j * k * eh
        if u0 is not None and kl.size:
            vp = _transform(u0, kl, -D, -1.0, D)
            vm = _transform(u0, kl, -D, 1.0, D)
            bracket[live] += decay[live] * (p[live] * vp - vm)
        weight = bracket / (1 - p * p) * dk
        shift = xs - D
    out = np.empty(xs.shape, dtype=complex)
    for lo in range(0, xs.size, 64):
        out[lo:lo + 64] = np.exp(1j * np.multiply.outer(shift[lo:lo + 64], k)) @ weight
    return -out / (2 * math.pi)


def utm_evaluate(u0, g0: Source | None, h0: Source | None, D: float, x, t: float,
                 r0: float | None = None, theta: float = THETA) -> UTMResult:
    """Evaluate the transform solution at points `x` and report imaginary residuals.

    All points share one set of contours, truncated for the point closest
    to either boundary.  On the boundary itself (|x| = D) the prescribed
    data are returned.

    Raises
    ------
    ContourError
        If any imaginary residual exceeds 1e-6.
    """
    if not D > 0:
        raise InvalidParams("D must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(xs) > D):
        raise InvalidParams("x must lie in [-D, D]")
    if not t > 0:
        raise InvalidParams("t must be positive")
    value = np.zeros(xs.shape)
    resid = np.zeros(xs.shape)
    parts = {}
    edge = np.abs(xs) == D
    for src, at in ((g0, xs == -D), (h0, xs == D)):
        if src is not None and np.any(at):
            value[at] = float(np.asarray(src(np.array([t])))[0])
    inner = xs[~edge]
    if inner.size:
        upper, lower = default_contours(D, float(np.min(inner)), t, r0, theta)
        lower = default_contours(D, float(np.max(inner)), t, r0, theta)[1]
        parts = {
            "real_line": _real_line(u0, D, inner, t) if u0 is not None else np.zeros(inner.shape, complex),
            "upper": _contour_sum(upper, u0, g0, h0, D, inner, t),
            "lower": _contour_sum(lower, u0, g0, h0, D, inner, t),
        }
        total = parts["real_line"] + parts["upper"] + parts["lower"]
        value[~edge] = total.real
        resid[~edge] = np.abs(total.imag)
    worst = float(np.max(resid, initial=0.0))
    if worst > IMAG_FAIL:
        raise ContourError(f"imaginary residual {worst:.3g} at t={t}")
    if worst > IMAG_TOL:
        log.warning("UTM imaginary residual %.3g exceeds %.0e", worst, IMAG_TOL)
    return UTMResult(xs, value, resid, parts)


def utm_solve(u0, g0: Source | None, h0: Source | None, D: float, x, t: float, **kw):
    """Real part of the transform solution at points `x` and time `t`."""
    out = utm_evaluate(u0, g0, h0, D, x, t, **kw).value
    return float(out[0]) if np.ndim(x) == 0 else out

"""Special functions behind the self-similar profiles.

Kummer's confluent hypergeometric function 1F1(a, b; z) on z >= 0, real-index
Hermite functions H_nu, the imaginary error function and a signed log-gamma.

1F1 is summed as a compensated Taylor series up to ``Z_SWITCH`` and replaced by
its leading large-z term beyond that.  Every function that would overflow for
large arguments also has a ``*_scaled`` companion that carries the Gaussian
factor analytically; the profile code uses those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import dawsn, gammaln, roots_genlaguerre

from .errors import DegenerateLeadingTerm, InvalidParams, Overflow, Pole

Z_SWITCH = 40.0
MAX_TERMS = 500
LOG_MAX = math.log(np.finfo(float).max)
ERFI_SERIES_LIMIT = 3.0
HERMITE_X2_MAX = 700.0
# Crossover between the two-Kummer form (cancels for x > 0) and the integral.
HERMITE_TAIL_X = 1.25
LAGUERRE_NODES = 40
# Beyond this 1 - 2y Dawson(y) is summed from its asymptotic series.
DAWSON_GAP_SWITCH = 8.0

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _is_nonpositive_integer(a: float) -> bool:
    return a <= 0 and float(a) == math.floor(a)


def log_gamma(x: float) -> tuple[float, int]:
    """Return ``(ln|Gamma(x)|, sign(Gamma(x)))``.

    Raises
    ------
    Pole
        If `x` is zero or a negative integer.
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise Pole(f"Gamma has a pole at {x}")
    if x > 0:
        return math.lgamma(x), 1
    # Gamma alternates sign between consecutive negative integers.
    sign = -1 if math.floor(x) % 2 else 1
    return math.lgamma(x), sign


def rgamma(x: float) -> float:
    """1/Gamma(x), exactly zero at the poles."""
    if _is_nonpositive_integer(x):
        return 0.0
    lg, sign = log_gamma(x)
    return sign * math.exp(-lg)


def _check_params(alpha: float, beta: float, z) -> np.ndarray:
    if _is_nonpositive_integer(beta):
        raise InvalidParams(f"beta={beta} is a nonpositive integer")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or not np.all(np.isfinite(z)):
        raise InvalidParams("z must be finite and nonnegative")
    return z


@dataclass(frozen=True)
class KummerParams:
    """Validated (alpha, beta, z) with beta not a nonpositive integer and z >= 0."""

    alpha: float
    beta: float
    z: float

    def __post_init__(self):
        _check_params(self.alpha, self.beta, self.z)

    def evaluate(self) -> float:
        return kummer_1f1(self.alpha, self.beta, self.z)


def _kummer_series(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    # Kahan-compensated Taylor sum, vectorised over z.
    total = np.ones_like(z)
    comp = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(MAX_TERMS):
        term = term * ((alpha + k) / (beta + k)) * z / (k + 1)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if not np.any(term):
            break
        if k > np.max(z) and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _log_leading(alpha: float, beta: float, z: np.ndarray) -> tuple[np.ndarray, int]:
    """log|z^(a-b) Gamma(b)/Gamma(a)| (without the e^z) and its sign."""
    lb, sb = log_gamma(beta)
    la, sa = log_gamma(alpha)
    return (alpha - beta) * np.log(z) + lb - la, sb * sa


def kummer_asymptotic(alpha: float, beta: float, z):
    """Leading large-z term ``e^z z^(alpha-beta) Gamma(beta)/Gamma(alpha)``.

    Evaluated in log space; only the final exponential can overflow.

    Raises
    ------
    DegenerateLeadingTerm
        When `alpha` is a nonpositive integer.  The series terminates there and
        should be used instead.
    Overflow
        When the result is not representable.
    """
    z = _check_params(alpha, beta, z)
    if _is_nonpositive_integer(alpha):
        raise DegenerateLeadingTerm(f"1/Gamma(alpha) vanishes at alpha={alpha}")
    if np.any(z <= 0):
        raise InvalidParams("asymptotic form needs z > 0")
    logmag, sign = _log_leading(alpha, beta, z)
    logmag = logmag + z
    if np.any(logmag > LOG_MAX):
        raise Overflow("kummer_asymptotic result exceeds double range")
    out = sign * np.exp(logmag)
    return float(out) if out.ndim == 0 else out


def kummer_1f1(alpha: float, beta: float, z):
    """Confluent hypergeometric function 1F1(alpha, beta; z) for real z >= 0.

    Series for ``z <= Z_SWITCH`` (or any z when alpha is a nonpositive
    integer, where the series is a polynomial); leading asymptotic term above.
    Accepts scalar or array `z`.
    """
    z = _check_params(alpha, beta, z)
    if _is_nonpositive_integer(alpha):
        out = _kummer_series(alpha, beta, z)
        if not np.all(np.isfinite(out)):
            raise Overflow("1F1 polynomial overflowed")
        return float(out) if out.ndim == 0 else out
    out = np.empty_like(z)
    small = z <= Z_SWITCH
    if np.any(small):
        out[small] = _kummer_series(alpha, beta, z[small])
    if np.any(~small):
        out[~small] = kummer_asymptotic(alpha, beta, z[~small])
    return float(out) if out.ndim == 0 else out


def kummer_1f1_scaled(alpha: float, beta: float, z):
    """``exp(-z) * 1F1(alpha, beta; z)``, finite for arbitrarily large z."""
    z = _check_params(alpha, beta, z)
    out = np.empty_like(z)
    small = z <= Z_SWITCH
    if _is_nonpositive_integer(alpha):
        small = np.ones_like(z, dtype=bool)
    if np.any(small):
        zs = z[small]
        out[small] = np.exp(-zs) * _kummer_series(alpha, beta, zs)
    if np.any(~small):
        logmag, sign = _log_leading(alpha, beta, z[~small])
        out[~small] = sign * np.exp(logmag)
    return float(out) if out.ndim == 0 else out


def hermite_poly(n: int, x):
    """Physicists' Hermite polynomial by the three-term recurrence."""
    if n < 0:
        raise InvalidParams("n must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return float(h_prev) if x.ndim == 0 else h_prev
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return float(h) if x.ndim == 0 else h


def _hermite_weights(nu: float) -> tuple[float, float]:
    scale = 2.0**nu * math.sqrt(math.pi)
    return scale * rgamma((1.0 - nu) / 2.0), scale * rgamma(-nu / 2.0)


def _hermite_negative(mu: float, x: np.ndarray) -> np.ndarray:
    """H_mu(x) for mu < 0 and x > 0 from the integral

        H_mu(x) = Gamma(-mu)^-1 int_0^inf exp(-t^2 - 2 x t) t^(-mu-1) dt.

    With s = 2 x t the weight s^(-mu-1) e^-s is generalized Laguerre and the
    remaining factor exp(-s^2 / (4 x^2)) is smooth, so a fixed rule suffices.
    """
    s, w = roots_genlaguerre(LAGUERRE_NODES, -mu - 1.0)
    smooth = np.exp(-np.multiply.outer(0.25 / (x * x), s * s))
    return (smooth @ w) * np.exp(mu * np.log(2.0 * x) - gammaln(-mu))


def _hermite_positive(nu: float, x: np.ndarray) -> np.ndarray:
    """H_nu(x) for x > 0 free of the cancellation in the two-Kummer form.

    Indices below -1 come straight from the integral; otherwise two indices
    below -1 (where the Laguerre weight is bounded) are lifted by the
    recurrence H_{m+1} = 2x H_m - 2m H_{m-1}.
    """
    if nu < -1:
        return _hermite_negative(nu, x)
    steps = math.floor(nu) + 2
    mu = nu - steps
    prev, cur = _hermite_negative(mu - 1.0, x), _hermite_negative(mu, x)
    for j in range(steps):
        prev, cur = cur, 2.0 * x * cur - 2.0 * (mu + j) * prev
    return cur


def _hermite_core(nu: float, x: np.ndarray, scaled: bool) -> tuple[np.ndarray, np.ndarray]:
    """Two-Kummer evaluation; also returns |piece1| + |piece2| for conditioning."""
    w1, w2 = _hermite_weights(nu)
    z = x * x
    f1 = kummer_1f1_scaled if scaled else kummer_1f1
    out = np.zeros_like(x)
    size = np.zeros_like(x)
    if w1 != 0.0:
        piece = w1 * f1(-nu / 2.0, 0.5, z)
        out, size = out + piece, size + np.abs(piece)
    if w2 != 0.0:
        piece = 2.0 * x * w2 * f1((1.0 - nu) / 2.0, 1.5, z)
        out, size = out - piece, size + np.abs(piece)
    return out, size


def _hermite_eval(nu: float, x, scaled: bool):
    x = np.asarray(x, dtype=float)
    xa = np.atleast_1d(x)
    if np.any(xa * xa > HERMITE_X2_MAX) and not scaled:
        raise Overflow(f"hermite_nu argument beyond |x| = {math.sqrt(HERMITE_X2_MAX):.2f}")
    polynomial = nu >= 0 and float(nu) == math.floor(nu)
    out = np.empty_like(xa)
    # For x > 0 the two Kummer pieces cancel to leading order.
    tail = (xa > HERMITE_TAIL_X) & (not polynomial)
    if np.any(~tail):
        out[~tail] = _hermite_core(nu, xa[~tail], scaled)[0]
    if np.any(tail):
        xt = xa[tail]
        with np.errstate(over="ignore", under="ignore"):
            value = _hermite_positive(nu, xt)
            out[tail] = value * np.exp(-xt * xt) if scaled else value
    if not np.all(np.isfinite(out)):
        raise Overflow("hermite_nu overflowed")
    return float(out[0]) if x.ndim == 0 else out


def hermite_nu(nu: float, x):
    """Hermite function H_nu(x) for real index nu.

    Uses the two-Kummer representation

        H_nu(x) = 2^nu sqrt(pi) [ 1F1(-nu/2, 1/2; x^2) / Gamma((1-nu)/2)
                                  - 2x 1F1((1-nu)/2, 3/2; x^2) / Gamma(-nu/2) ]

    which reduces to the Hermite polynomial for nonnegative integer nu (one of
    the two reciprocal Gammas vanishes).
    """
    return _hermite_eval(float(nu), x, scaled=False)


def hermite_nu_scaled(nu: float, x):
    """``exp(-x^2) * H_nu(x)``; no overflow guard needed."""
    return _hermite_eval(float(nu), x, scaled=True)


def erfi(x):
    """Imaginary error function (2/sqrt(pi)) * int_0^x exp(s^2) ds."""
    x = np.asarray(x, dtype=float)
    xa = np.atleast_1d(x)
    if np.any(xa * xa > LOG_MAX):
        raise Overflow("erfi overflows beyond |x| ~ 26.6")
    out = np.empty_like(xa)
    small = np.abs(xa) <= ERFI_SERIES_LIMIT
    if np.any(small):
        out[small] = _erfi_series(xa[small])
    if np.any(~small):
        xl = xa[~small]
        out[~small] = _TWO_OVER_SQRT_PI * np.exp(xl * xl) * dawsn(xl)
    return float(out[0]) if x.ndim == 0 else out


def erfi_scaled(x):
    """``exp(-x^2) * erfi(x)`` = (2/sqrt(pi)) * Dawson(x)."""
    x = np.asarray(x, dtype=float)
    out = _TWO_OVER_SQRT_PI * dawsn(x)
    return float(out) if x.ndim == 0 else out


def _erfi_series(x: np.ndarray) -> np.ndarray:
    x2 = x * x
    power = x.copy()
    total = x.copy()
    for k in range(1, 200):
        power = power * x2 / k
        term = power / (2 * k + 1)
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return _TWO_OVER_SQRT_PI * total


def _dawson_gap(y: np.ndarray) -> np.ndarray:
    """1 - 2y Dawson(y), with the large-y cancellation handled by its expansion."""
    out = np.empty_like(y)
    small = y <= DAWSON_GAP_SWITCH
    out[small] = 1.0 - 2.0 * y[small] * dawsn(y[small])
    if np.any(~small):
        inv = 1.0 / (2.0 * y[~small] ** 2)
        term = -inv
        total = term.copy()
        for k in range(2, 40):
            term = term * (2 * k - 1) * inv
            total = total + term
            if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
                break
        out[~small] = total
    return out


def kummer_half_scaled(z):
    """``exp(-z) 1F1(-1/2, 1/2; z)`` for any z >= 0, from 1 - 2 sqrt(z) Dawson(sqrt(z)).

    Unlike the general routine this is accurate past ``Z_SWITCH``, where the
    general routine keeps only the leading asymptotic term.
    """
    z = _check_params(-0.5, 0.5, z)
    out = _dawson_gap(np.sqrt(np.atleast_1d(z)))
    return float(out[0]) if z.ndim == 0 else out


def kummer_half_scaled_dz(z):
    """Derivative in z of :func:`kummer_half_scaled`: -(Dawson(y)/y + 1 - 2y Dawson(y)), y = sqrt(z).

    The two parts cancel to O(y^-4) at large y, where their combined
    expansion sum_k 2k (2k-1)!! / (2y^2)^(k+1) is used instead.
    """
    z = _check_params(-0.5, 0.5, z)
    y = np.sqrt(np.atleast_1d(z))
    out = np.empty_like(y)
    small = y <= DAWSON_GAP_SWITCH
    ys = y[small]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(ys > 0, dawsn(ys) / ys, 1.0)
    out[small] = -(ratio + _dawson_gap(ys))
    if np.any(~small):
        inv = 1.0 / (2.0 * y[~small] ** 2)
        double_fact = np.ones_like(inv)
        power = inv.copy()
        total = np.zeros_like(inv)
        for k in range(1, 40):
            double_fact = double_fact * (2 * k - 1)
            power = power * inv
            term = 2 * k * double_fact * power
            total = total + term
            if np.all(term <= 1e-17 * total):
                break
        out[~small] = total
    return float(out[0]) if z.ndim == 0 else out

"""Scalar special functions underlying the cost function and kernels.

All branch handling for negative arguments is done through explicit
trigonometric rewrites, keeping every function real-valued.  Near the origin
each function switches to a truncated Taylor series; the thresholds are
chosen so that series and closed form agree well inside the overlap band
(verified by test).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import CoeffTable
from .errors import DomainError

__all__ = [
    "GInvResult",
    "g",
    "g_prime",
    "g_inv",
    "g_inv_array",
    "G",
    "G_array",
    "G_n",
    "G_n_tilde",
    "series_G_sum",
    "h_kernel",
    "v_profile",
    "v_profile_array",
]

PI_SQ = math.pi * math.pi

_G_SERIES_CUT = 1e-4
_H_SERIES_CUT = 1e-3
_V_SERIES_CUT = 1e-3


def g(r: float) -> float:
    """``sinh(sqrt(r))/sqrt(r)`` continued through 0 and down to -pi^2.

    Strictly increasing from 0 at ``r = -pi^2`` through 1 at ``r = 0``.
    """
    r = float(r)
    if r <= -PI_SQ:
        raise DomainError(f"g requires r > -pi^2, got {r}")
    if abs(r) <= _G_SERIES_CUT:
        return _g_series(r)
    if r > 0.0:
        x = math.sqrt(r)
        if x > 700.0:
            # sinh overflows; fall back to the dominant exponential
            log_val = x - math.log(2.0 * x)
            return math.inf if log_val > 709.0 else math.exp(log_val)
        return math.sinh(x) / x
    m = math.sqrt(-r)
    return math.sin(m) / m


def _g_series(r: float) -> float:
    # sum_n r^n/(2n+1)!; seven terms give full precision for |r| <= 1e-4
    acc = 0.0
    for n in range(6, -1, -1):
        acc = acc * r + 1.0 / math.factorial(2 * n + 1)
    return acc


def g_prime(r: float) -> float:
    """Derivative of :func:`g`."""
    r = float(r)
    if r <= -PI_SQ:
        raise DomainError(f"g_prime requires r > -pi^2, got {r}")
    if abs(r) <= _G_SERIES_CUT:
        acc = 0.0
        for n in range(7, 0, -1):
            acc = acc * r + n / math.factorial(2 * n + 1)
        return acc
    if r > 0.0:
        x = math.sqrt(r)
        return (x * math.cosh(x) - math.sinh(x)) / (2.0 * r * x)
    m = math.sqrt(-r)
    return (math.sin(m) - m * math.cos(m)) / (2.0 * m**3)


@dataclass(frozen=True)
class GInvResult:
    value: float
    residual: float
    iterations: int


def g_inv(rho: float, initial_guess: float | None = None) -> GInvResult:
    """Unique ``r`` in ``(-pi^2, inf)`` with ``g(r) = rho``.

    Safeguarded Newton, solved in ``sqrt(r)`` above 1 and ``sqrt(-r)`` below
    so both endpoints stay well conditioned.  The forward residual is at the
    rounding floor: relative 1e-13 for rho >~ 1e-4, and limited only by the
    float64 spacing of ``r`` near ``-pi^2`` for smaller rho (one ulp of ``r``
    there moves ``g`` by ~2e-16 absolute).  An optional ``initial_guess``
    warm-starts the iteration for callers sweeping nearby arguments.
    """
    rho = float(rho)
    if rho <= 0.0:
        raise DomainError(f"g_inv requires rho > 0, got {rho}")
    if rho == 1.0:
        return GInvResult(0.0, 0.0, 0)

    if rho > 1.0:
        # solve in x = sqrt(r): log(sinh x / x) = log rho, overflow-free
        target = math.log(rho)
        x_lo, x_hi = 0.0, max(2.0, math.log(2.0 * rho) + 2.0)
        while _log_g_pos(x_hi) < target:
            x_hi += math.log(2.0 * x_hi) + 1.0
        x = math.sqrt(initial_guess) if initial_guess is not None and initial_guess > 0 else None
        if x is None or not (x_lo < x < x_hi):
            x = min(math.sqrt(6.0 * target), x_hi)  # from log g ~ x^2/6 near 0
        iters = 0
        for iters in range(1, 80):
            fx = _log_g_pos(x) - target
            if fx > 0:
                x_hi = x
            else:
                x_lo = x
            slope = _coth(x) - 1.0 / x if x > 1e-12 else x / 3.0 + 1e-300
            x_new = x - fx / slope
            if not (x_lo < x_new < x_hi):
                x_new = 0.5 * (x_lo + x_hi)
            if abs(x_new - x) <= 1e-15 * x_new:
                x = x_new
                break
            x = x_new
        r = x * x
    else:
        # solve in m = sqrt(-r): sin(m)/m = rho on (0, pi); bisection-safe
        # conditioning all the way to the m = pi endpoint
        m_lo, m_hi = 0.0, math.pi
        m = (
            math.sqrt(-initial_guess)
            if initial_guess is not None and -PI_SQ < initial_guess < 0
            else math.sqrt(6.0 * (1.0 - rho))
        )
        if not (m_lo < m < m_hi):
            m = 0.5 * math.pi
        iters = 0
        for iters in range(1, 100):
            fm = _g_neg_of_m(m) - rho
            if fm > 0:
                m_lo = m
            else:
                m_hi = m
            m_new = m - fm / _g_neg_prime_of_m(m)
            if not (m_lo < m_new < m_hi):
                m_new = 0.5 * (m_lo + m_hi)
            if abs(m_new - m) <= 1e-16 * m_new:
                m = m_new
                break
            m = m_new
        r = -m * m
    residual = g(r) - rho
    return GInvResult(r, residual, iters)


def _g_neg_of_m(m: float) -> float:
    # g(-m^2) = sin(m)/m with series near 0
    if m < 1e-4:
        return 1.0 - m * m / 6.0 + m**4 / 120.0
    return math.sin(m) / m


def _g_neg_prime_of_m(m: float) -> float:
    # d/dm [sin(m)/m]
    if m < 1e-4:
        return -m / 3.0 + m**3 / 30.0
    return (m * math.cos(m) - math.sin(m)) / (m * m)


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


def _log_g_pos(x: float) -> float:
    # log(sinh x / x), stable for all x > 0
    if x < 1e-8:
        return x * x / 6.0
    return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0 * x)


def g_inv_array(rho: np.ndarray) -> np.ndarray:
    """Vectorised :func:`g_inv` (values only)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        raise DomainError("g_inv_array requires finite rho > 0")
    out = np.zeros_like(rho)

    upper = rho > 1.0
    if np.any(upper):
        t = np.log(rho[upper])
        x_lo = np.zeros(t.shape)
        x_hi = np.maximum(2.0, np.log(2.0 * rho[upper]) + 2.0)
        for _ in range(6):
            bad = _log_g_pos_arr(x_hi) < t
            if not bad.any():
                break
            x_hi = np.where(bad, x_hi + np.log(2.0 * x_hi) + 1.0, x_hi)
        for _ in range(64):
            mid = 0.5 * (x_lo + x_hi)
            high = _log_g_pos_arr(mid) > t
            x_hi = np.where(high, mid, x_hi)
            x_lo = np.where(high, x_lo, mid)
        x = 0.5 * (x_lo + x_hi)
        slope = np.where(x > 1e-12, 1.0 / np.tanh(np.maximum(x, 1e-12)) - 1.0 / np.maximum(x, 1e-12), x / 3.0 + 1e-300)
        for _ in range(3):
            x = x - (_log_g_pos_arr(x) - t) / slope
            x = np.clip(x, x_lo, x_hi)
            slope = 1.0 / np.tanh(x) - 1.0 / x
        out[upper] = x * x

    lower = rho < 1.0
    if np.any(lower):
        rr = rho[lower]
        m_lo = np.zeros(rr.shape)
        m_hi = np.full(rr.shape, math.pi)
        for _ in range(64):
            mid = 0.5 * (m_lo + m_hi)
            high = _sinc_arr(mid) > rr  # sin(m)/m decreasing: root to the right
            m_lo = np.where(high, mid, m_lo)
            m_hi = np.where(high, m_hi, mid)
        m = 0.5 * (m_lo + m_hi)
        for _ in range(3):
            m = m - (_sinc_arr(m) - rr) / _sinc_prime_arr(m)
            m = np.clip(m, m_lo, m_hi)
        out[lower] = -m * m
    return out


def _sinc_arr(m: np.ndarray) -> np.ndarray:
    small = m < 1e-4
    return np.where(small, 1.0 - m * m / 6.0, np.sin(np.maximum(m, 1e-300)) / np.maximum(m, 1e-300))


def _sinc_prime_arr(m: np.ndarray) -> np.ndarray:
    small = m < 1e-4
    ms = np.maximum(m, 1e-300)
    return np.where(small, -m / 3.0 - 1e-300, (ms * np.cos(ms) - np.sin(ms)) / (ms * ms))


def _log_g_pos_arr(x: np.ndarray) -> np.ndarray:
    return x + np.log1p(-np.exp(-2.0 * x)) - np.log(2.0 * x)


def _sign_split(eta: float) -> float:
    # sign of 4*g_inv(1/eta) + pi^2, resolved by the explicit case split at pi/2
    half_pi = 0.5 * math.pi
    if eta < half_pi:
        return 1.0
    if eta == half_pi:
        return 0.0
    return -1.0


def G(eta: float) -> float:
    """Convex profile of the optimal cost in the invariant ``eta``.

    Non-negative with unique zero at ``eta = 1``; grows like ``4 eta`` on the
    right and like ``log^2 eta`` on the left.
    """
    eta = float(eta)
    if eta <= 0.0:
        raise DomainError(f"G requires eta > 0, got {eta}")
    gi = g_inv(1.0 / eta).value
    radicand = max(eta * eta + gi, 0.0)
    return 2.0 * eta - 2.0 * _sign_split(eta) * math.sqrt(radicand) + gi


def G_array(eta: np.ndarray) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0.0):
        raise DomainError("G_array requires eta > 0")
    gi = g_inv_array(1.0 / eta)
    radicand = np.maximum(eta * eta + gi, 0.0)
    sign = np.where(eta < 0.5 * math.pi, 1.0, -1.0)
    sign = np.where(eta == 0.5 * math.pi, 0.0, sign)
    return 2.0 * eta - 2.0 * sign * np.sqrt(radicand) + gi


def G_n(n: int, eta: float, table: CoeffTable) -> float:
    """Order-``n`` two-sided basis term with coefficients ``a_n`` / ``b_n``."""
    if n < 2 or n > table.N:
        raise DomainError(f"G_n requires 2 <= n <= {table.N}, got {n}")
    eta = float(eta)
    if eta <= 0.0:
        raise DomainError("G_n requires eta > 0")
    if eta > 1.0:
        return table.a_float(n) * (eta - 1.0) ** n / eta ** (n - 1)
    if eta < 1.0:
        w = -math.log(eta)
        return table.b_float(n) * w**n / (1.0 + w) ** (n - 2)
    return 0.0


def G_n_tilde(n: int, eta: float, table: CoeffTable) -> float:
    """Same as :func:`G_n` above 1; lower-bound basis with ``b~_n`` below 1."""
    if n < 2 or n > table.N:
        raise DomainError(f"G_n_tilde requires 2 <= n <= {table.N}, got {n}")
    eta = float(eta)
    if eta <= 0.0:
        raise DomainError("G_n_tilde requires eta > 0")
    if eta > 1.0:
        return table.a_float(n) * (eta - 1.0) ** n / eta ** (n - 1)
    if eta < 1.0:
        w = -math.log(eta)
        return table.b_tilde_float(n) * w**n / (1.0 + w) ** (n - 1)
    return 0.0


def series_G_sum(
    eta: np.ndarray, a: np.ndarray, b: np.ndarray, tilde: bool
) -> np.ndarray:
    """Vectorised ``sum_{n=2}^{N}`` of the basis terms at ``eta``.

    ``a``/``b`` are float coefficient arrays indexed from order 2.  With
    ``tilde=True`` the below-one denominator exponent is ``n-1`` (and ``b``
    must hold the lower-bound coefficients), otherwise ``n-2``.
    """
    eta = np.asarray(eta, dtype=float)
    out = np.zeros_like(eta)

    above = eta > 1.0
    if above.any():
        nu = 1.0 - 1.0 / eta[above]
        acc = np.zeros_like(nu)
        for coeff in a[::-1]:
            acc = acc * nu + coeff
        out[above] = eta[above] * acc * nu * nu

    below = eta < 1.0
    if below.any():
        w = -np.log(eta[below])
        zeta = w / (1.0 + w)
        acc = np.zeros_like(zeta)
        for coeff in b[::-1]:
            acc = acc * zeta + coeff
        factor = (1.0 + w) if tilde else (1.0 + w) ** 2
        out[below] = factor * acc * zeta * zeta
    return out


def h_kernel(eta: float) -> float:
    """Curvature kernel driving the along-curve transport rate.

    ``2 sqrt(eta) coth(sqrt(eta)) - 2 eta / (1 - sqrt(eta) coth(sqrt(eta)))``
    with the trigonometric branch below zero; equals 8 at the origin.
    """
    eta = float(eta)
    if eta <= -PI_SQ:
        raise DomainError(f"h_kernel requires eta > -pi^2, got {eta}")
    if abs(eta) <= _H_SERIES_CUT:
        return _h_kernel_series(eta)
    if eta > 0.0:
        x = math.sqrt(eta)
        w = x * _coth(x)
    else:
        m = math.sqrt(-eta)
        w = m * math.cos(m) / math.sin(m)
    return 2.0 * w - 2.0 * eta / (1.0 - w)


def _h_kernel_series(eta: float) -> float:
    return 8.0 + eta * (16.0 / 15.0 + eta * (-88.0 / 1575.0 + eta * (16.0 / 3375.0)))


def v_profile(eta: float) -> float:
    """Correction-factor profile; positive on ``(-4 pi^2, inf)`` with v(0)=1.

    Evaluated through half-argument identities so the quadratic cancellation
    near 0 costs only one order of accuracy.
    """
    eta = float(eta)
    if eta <= -4.0 * PI_SQ:
        raise DomainError(f"v_profile requires eta > -4 pi^2, got {eta}")
    if abs(eta) <= _V_SERIES_CUT:
        return _v_profile_series(eta)
    if eta > 0.0:
        x = math.sqrt(eta)
        s, c = math.sinh(0.5 * x), math.cosh(0.5 * x)
        inner = 6.0 * s * (x * c - 2.0 * s)
    else:
        m = math.sqrt(-eta)
        s, c = math.sin(0.5 * m), math.cos(0.5 * m)
        inner = 6.0 * s * (2.0 * s - m * c)
    return abs(eta) / (2.0 * math.sqrt(inner))


def _v_profile_series(eta: float) -> float:
    # 1/v^2 = 1 + sum_n 12/(2n+3)! * (n+1)/(n+2) * eta^n
    inv_sq = 1.0 + eta * (
        1.0 / 15.0
        + eta * (1.0 / 560.0 + eta * (1.0 / 37800.0 + eta * (1.0 / 3991680.0)))
    )
    return 1.0 / math.sqrt(inv_sq)


def v_profile_array(eta: np.ndarray) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= -4.0 * PI_SQ):
        raise DomainError("v_profile_array requires eta > -4 pi^2")
    out = np.empty_like(eta)
    small = np.abs(eta) <= _V_SERIES_CUT
    pos = (eta > 0) & ~small
    neg = (eta < 0) & ~small
    if small.any():
        e = eta[small]
        inv_sq = 1.0 + e * (
            1.0 / 15.0
            + e * (1.0 / 560.0 + e * (1.0 / 37800.0 + e * (1.0 / 3991680.0)))
        )
        out[small] = 1.0 / np.sqrt(inv_sq)
    if pos.any():
        x = np.sqrt(eta[pos])
        s, c = np.sinh(0.5 * x), np.cosh(0.5 * x)
        out[pos] = eta[pos] / (2.0 * np.sqrt(6.0 * s * (x * c - 2.0 * s)))
    if neg.any():
        m = np.sqrt(-eta[neg])
        s, c = np.sin(0.5 * m), np.cos(0.5 * m)
        out[neg] = -eta[neg] / (2.0 * np.sqrt(6.0 * s * (2.0 * s - m * c)))
    return out

"""Optimal cost function: closed forms, series expansions and verifications.

The cost is always evaluated internally at unit volatility with the target
point reduced to the group identity; the left-invariance and time-scaling
identities make this exact and keep one code path for every branch.  The two
published closed forms are computed independently and cross-checked on every
call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import CoeffTable
from .errors import DomainError, InternalConsistencyError
from .geometry import GroupPoint, OrderedPair, h_invariant
from .scalar_kernels import g_inv, g_inv_array, series_G_sum

__all__ = [
    "CostEval",
    "psi_exact",
    "psi_value",
    "psi_series",
    "psi_langevin",
    "langevin_cov",
    "hjb_residual",
    "psi_hessian_check",
    "reduce_to_identity",
]

# Below this separation in the second coordinate the pair is treated as
# unreachable and the cost is +inf, matching the zero of the density there.
_SEP_FLOOR = 1e-300


@dataclass(frozen=True)
class CostEval:
    psi: float
    h: float
    E: float
    sigma: float


def reduce_to_identity(pair: OrderedPair, sigma: float) -> tuple[float, float, float]:
    """Map (pair, sigma) to the unit-volatility pole-at-identity frame.

    Returns ``(tau, x1, x2)`` with ``tau > 0`` such that the cost of the pair
    equals the reduced cost of ``(-tau, x1, x2)`` against the identity: first
    the group reduction ``z -> w^{-1} o z``, then the time/vol rescaling by
    ``sigma^2``.
    """
    z, w = pair.z, pair.w
    tau = sigma * sigma * (w.t - z.t)
    x1 = z.x1 / w.x1
    x2 = sigma * sigma * (z.x2 - w.x2) / w.x1
    return tau, x1, x2


def _psi_reduced_ginv_form(tau: float, x1: float, x2: float) -> tuple[float, float]:
    """Cost at ((-tau, x1, x2); identity), sigma = 1, via the g-inverse form.

    Returns ``(psi, gi)`` with ``gi = g_inv(1/h)``.
    """
    h = tau * math.sqrt(x1) / (-x2)
    gi = g_inv(1.0 / h).value
    chi = math.sqrt(x1)
    sign = 1.0 if h < 0.5 * math.pi else (0.0 if h == 0.5 * math.pi else -1.0)
    radicand = max(gi + h * h, 0.0)
    return (
        4.0 / tau * (gi + h * (chi + 1.0 / chi) - 2.0 * sign * math.sqrt(radicand)),
        gi,
    )


def _psi_reduced_energy_form(tau: float, x1: float, x2: float, gi: float) -> float:
    """Same cost through the energy-form expression (independent assembly)."""
    E = 4.0 * gi / (tau * tau)
    sign = 1.0 if 4.0 * gi + math.pi**2 > 0 else (0.0 if 4.0 * gi + math.pi**2 == 0 else -1.0)
    dy = -x2
    radicand = max(E + 4.0 * x1 / (dy * dy), 0.0)
    return E * tau + 4.0 * (x1 + 1.0) / dy - 4.0 * sign * math.sqrt(radicand)


def psi_exact(pair: OrderedPair, sigma: float = 1.0) -> CostEval:
    """Optimal steering cost of the pair at volatility ``sigma``.

    Computed through the g-inverse representation and cross-checked against
    the energy-form expression to 1e-10 relative; disagreement raises, since
    it would mean a branch error in one of the special functions.
    """
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    tau, x1, x2 = reduce_to_identity(pair, sigma)
    h = h_invariant(pair)
    dt = pair.dt
    if -x2 < _SEP_FLOOR:
        return CostEval(psi=math.inf, h=h, E=math.inf, sigma=sigma)
    psi_a, gi = _psi_reduced_ginv_form(tau, x1, x2)
    psi_b = _psi_reduced_energy_form(tau, x1, x2, gi)
    scale = max(abs(psi_a), abs(psi_b), 1.0)
    if abs(psi_a - psi_b) > 1e-10 * scale:
        raise InternalConsistencyError(
            f"cost forms disagree: {psi_a!r} vs {psi_b!r} at reduced ({tau}, {x1}, {x2})"
        )
    E = 4.0 * gi / (dt * dt)
    return CostEval(psi=psi_a, h=h, E=E, sigma=sigma)


def psi_value(pair: OrderedPair, sigma: float = 1.0) -> float:
    return psi_exact(pair, sigma).psi


def psi_series(
    pair: OrderedPair,
    sigma: float,
    N: int,
    table: CoeffTable,
    basis: str = "Gn",
) -> float:
    """Order-``N`` elementary expansion of the cost (no special-function inverse).

    ``basis='Gn'`` uses the asymptotics-preserving coefficients; ``'Gn_tilde'``
    uses the lower-bound coefficients below ``h = 1``.
    """
    if N < 2 or N > table.N:
        raise DomainError(f"need 2 <= N <= {table.N}")
    if basis not in ("Gn", "Gn_tilde"):
        raise DomainError(f"unknown basis {basis!r}")
    z, w = pair.z, pair.w
    h = h_invariant(pair)
    chi = math.sqrt(w.x1 / z.x1)
    a = np.array([float(v) for v in table.a[2 : N + 1]])
    if basis == "Gn":
        b = np.array([float(v) for v in table.b[2 : N + 1]])
        tilde = False
    else:
        b = np.array([float(v) for v in table.b_tilde[2 : N + 1]])
        tilde = True
    ssum = float(series_G_sum(np.array([h]), a, b, tilde)[0])
    return 4.0 / (sigma * sigma * pair.dt) * (h * (chi + 1.0 / chi - 2.0) + ssum)


def langevin_cov(sigma: float, s: float) -> np.ndarray:
    """Covariance of the constant-coefficient (Gaussian) comparison system."""
    return sigma * sigma * np.array([[s, -0.5 * s * s], [-0.5 * s * s, s**3 / 3.0]])


def psi_langevin(
    t: float, x1: float, x2: float, T: float, y1: float, y2: float, sigma: float = 1.0
) -> float:
    """Quadratic cost of the Gaussian comparison system (no ordering needed)."""
    if not T > t:
        raise DomainError("need T > t")
    s = T - t
    return (
        3.0 * (2.0 * (y2 - x2) - s * (x1 + y1)) ** 2 / (sigma * sigma * s**3)
        + (y1 - x1) ** 2 / (sigma * sigma * s)
    )


# Relative step sizes for the finite-difference verifications; coordinates are
# scaled by max(1, |coordinate|).
_FD_FIRST = 1e-5
_FD_SECOND = 1e-4


def _psi_of_coords(t, x1, x2, T, y1, y2, sigma) -> float:
    return psi_value(OrderedPair(GroupPoint(t, x1, x2), GroupPoint(T, y1, y2)), sigma)


def hjb_residual(pair: OrderedPair, sigma: float = 1.0, fd_step: float | None = None) -> float:
    """Normalised defect of the dynamic-programming identity at the pair.

    Checks ``Y psi = (x1 d_x1 psi / 2)^2`` with ``Y = d_t + x1 d_x2`` by
    fourth-order central differences; returns
    ``|Y psi - (x1 d_x1 psi / 2)^2| / (1 + |Y psi|)``.
    """
    z, w = pair.z, pair.w
    rel = _FD_FIRST if fd_step is None else fd_step
    # steps must keep the probed points strictly ordered
    h_t = min(rel * max(1.0, abs(z.t)), 0.05 * pair.dt)
    h_1 = rel * max(1.0, abs(z.x1))
    h_2 = min(rel * max(1.0, abs(z.x2)), 0.05 * (w.x2 - z.x2))

    def at(t=z.t, x1=z.x1, x2=z.x2) -> float:
        return _psi_of_coords(t, x1, x2, w.t, w.x1, w.x2, sigma)

    def d4(f, h):
        return (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)

    dt_psi = d4(lambda d: at(t=z.t + d), h_t)
    dx1_psi = d4(lambda d: at(x1=z.x1 + d), h_1)
    dx2_psi = d4(lambda d: at(x2=z.x2 + d), h_2)
    y_psi = dt_psi + z.x1 * dx2_psi
    rhs = (0.5 * z.x1 * dx1_psi) ** 2
    return abs(y_psi - rhs) / (1.0 + abs(y_psi))


def psi_hessian_check(
    w: GroupPoint, T_minus_t: float, sigma: float = 1.0, fd_step: float = _FD_SECOND
) -> float:
    """Max deviation of the FD Hessian at the zero-cost point from the Gaussian one.

    At ``x* = (y1, y2 - (T-t) y1)`` the cost vanishes to second order like the
    quadratic form of the comparison system with volatility ``sigma * y1``;
    this returns the max absolute difference of the 2x2 Hessians.
    """
    s = T_minus_t
    t0 = w.t - s
    x1s, x2s = w.x1, w.x2 - s * w.x1
    h1 = fd_step * max(1.0, abs(x1s))
    h2 = fd_step * max(1.0, abs(x2s))

    def at(d1: float, d2: float) -> float:
        return _psi_of_coords(t0, x1s + d1, x2s + d2, w.t, w.x1, w.x2, sigma)

    f00 = at(0.0, 0.0)
    h11 = (at(h1, 0) - 2.0 * f00 + at(-h1, 0)) / (h1 * h1)
    h22 = (at(0, h2) - 2.0 * f00 + at(0, -h2)) / (h2 * h2)
    h12 = (at(h1, h2) - at(h1, -h2) - at(-h1, h2) + at(-h1, -h2)) / (4.0 * h1 * h2)

    sig_eff = sigma * w.x1
    exact11 = 8.0 / (sig_eff**2 * s)
    exact12 = 12.0 / (sig_eff**2 * s * s)
    exact22 = 24.0 / (sig_eff**2 * s**3)
    return max(abs(h11 - exact11), abs(h12 - exact12), abs(h22 - exact22))


def psi_reduced_array(tau: np.ndarray, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
    """Vectorised unit-volatility cost of (identity; (tau, y1, y2)), tau > 0.

    Mirrors the pole-at-identity reduction with the pole in the first slot,
    which is the frame used by the kernel quadratures: ``h = tau sqrt(y1)/y2``.
    """
    tau = np.asarray(tau, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    h = tau * np.sqrt(y1) / y2
    gi = g_inv_array(1.0 / h)
    chi = np.sqrt(y1)
    sign = np.where(h < 0.5 * math.pi, 1.0, -1.0)
    sign = np.where(h == 0.5 * math.pi, 0.0, sign)
    radicand = np.maximum(gi + h * h, 0.0)
    return 4.0 / tau * (gi + h * (chi + 1.0 / chi) - 2.0 * sign * np.sqrt(radicand))

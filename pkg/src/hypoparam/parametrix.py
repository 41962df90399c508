"""Parametrix kernels: leading kernel, correction factor and residual term.

``H1`` carries the exact off-diagonal exponential decay through the optimal
cost and the correct on-diagonal singularity through the Gaussian-type
prefactor; multiplying by the transport correction ``u`` makes the generator
residual uniformly bounded in time.  The concentration property (the kernel
integrates any bounded continuous test function to its value at the pole as
the time gap vanishes) is exposed as a numerical operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cost import psi_value, reduce_to_identity
from .errors import DomainError
from .geometry import GroupPoint, OrderedPair, h_invariant, optimal_curve
from .numerics import QuadratureResult, central_diff, integrate_1d, integrate_rect
from .scalar_kernels import G_array, g_inv, g_inv_array, h_kernel, v_profile, v_profile_array

__all__ = [
    "KernelEval",
    "H1",
    "log_H1",
    "u_correction",
    "u_of_h",
    "kernel_eval",
    "transport_data",
    "f_along_curve",
    "K0",
    "delta_test",
    "DELTA_WEIGHTS",
]

_SQRT12 = math.sqrt(12.0)
_LOG_PREFACTOR = math.log(_SQRT12 / (2.0 * math.pi))
# exp underflows to 0 below this; the kernel is returned as exact 0 there
_LOG_FLOOR = -745.0


def log_H1(pair: OrderedPair) -> float:
    """Logarithm of the leading kernel at unit volatility."""
    psi = psi_value(pair, 1.0)
    if math.isinf(psi):
        return -math.inf
    return _LOG_PREFACTOR - 2.0 * math.log(pair.dt) - 2.0 * math.log(pair.w.x1) - 0.5 * psi


def H1(pair: OrderedPair) -> float:
    """Leading kernel ``sqrt(12)/(2 pi (T-t)^2 y1^2) exp(-psi/2)`` (sigma = 1).

    Underflows gracefully to 0 for very large cost.
    """
    lv = log_H1(pair)
    return 0.0 if lv < _LOG_FLOOR else math.exp(lv)


def u_of_h(h: float) -> float:
    """Correction factor as a function of the invariant ratio alone."""
    if h <= 0:
        raise DomainError("h must be positive")
    return v_profile(4.0 * g_inv(1.0 / h).value)


def u_correction(pair: OrderedPair) -> float:
    """Transport correction ``v(4 g_inv(1/h))`` of the pair."""
    return u_of_h(h_invariant(pair))


@dataclass(frozen=True)
class KernelEval:
    H1: float
    u: float
    H: float
    psi: float
    h: float


def kernel_eval(pair: OrderedPair) -> KernelEval:
    """Kernel factorisation ``H = u * H1`` together with its ingredients."""
    h = h_invariant(pair)
    psi = psi_value(pair, 1.0)
    h1 = H1(pair)
    u = u_of_h(h)
    return KernelEval(H1=h1, u=u, H=u * h1, psi=psi, h=h)


def transport_data(pair: OrderedPair, fd_step: float = 1e-5) -> tuple[float, float]:
    """Transport rate ``f`` and drift-correction field at the pair.

    ``f = 2/(T-t) - x1^2 d2_psi/4`` and ``g_field = x1^2 d1_psi / 2``, with the
    cost derivatives in the first spatial coordinate taken by central
    differences.
    """
    z, w = pair.z, pair.w
    h1 = fd_step * max(1.0, abs(z.x1))

    def at(x1: float) -> float:
        return psi_value(OrderedPair(GroupPoint(z.t, x1, z.x2), w), 1.0)

    d1 = central_diff(at, z.x1, 1, h1)
    d2 = central_diff(at, z.x1, 2, h1 * 10.0)
    f = 2.0 / pair.dt - z.x1 * z.x1 * d2 / 4.0
    g_field = 0.5 * z.x1 * z.x1 * d1
    return f, g_field


def f_along_curve(pair: OrderedPair, s: float) -> float:
    """Closed form of the transport rate on the optimal curve at time ``s``.

    Equals ``(2 - h_kernel((T-s)^2 E / 4) / 4) / (T-s)``; finite up to the
    endpoint because the kernel tends to 8 on the diagonal.
    """
    z, w = pair.z, pair.w
    if not (z.t <= s < w.t):
        raise DomainError("s must lie in [t, T)")
    E = 4.0 * g_inv(1.0 / h_invariant(pair)).value / (pair.dt**2)
    tau = w.t - s
    return (2.0 - h_kernel(0.25 * tau * tau * E) / 4.0) / tau


def u_path_integral(pair: OrderedPair, rel_tol: float = 1e-11) -> QuadratureResult:
    """Independent route to the correction: ``exp(integral of the transport rate)``.

    Integrates the closed-form rate along the optimal curve after rescaling
    the time variable to (0, 1); used as an oracle against :func:`u_of_h`.
    """
    gi = g_inv(1.0 / h_invariant(pair)).value

    def integrand(tau: np.ndarray) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        out = np.empty_like(tau)
        for i, tv in enumerate(tau.ravel()):
            arg = tv * tv * gi
            out.ravel()[i] = (2.0 - h_kernel(arg) / 4.0) / tv if tv > 0 else 0.0
        return out

    res = integrate_1d(integrand, 1e-14, 1.0, rel_tol=rel_tol, abs_tol=1e-14)
    return QuadratureResult(math.exp(res.value), res.error_estimate, res.evaluations, res.converged)


def K0(pair: OrderedPair, fd_step: float = 1e-6) -> float:
    """Leading residual term ``(x1^2/2) d2_u * H1`` of the corrected kernel.

    The second derivative of the correction in the first coordinate is
    reduced by the chain rule to derivatives of the scalar profile
    ``psi_u(rho) = v(4 g_inv(rho))`` at ``rho = 1/h``, which are taken by
    finite differences on that one-dimensional profile only.
    """
    h = h_invariant(pair)
    rho = 1.0 / h

    def profile(r: float) -> float:
        return v_profile(4.0 * g_inv(r).value)

    step = fd_step * max(rho, 1e-3)
    p1 = central_diff(profile, rho, 1, step)
    p2 = central_diff(profile, rho, 2, step * 30.0)
    # x1 d(rho)/d(x1) = -rho/2 and x1^2 d2(rho)/d(x1)^2 = 3 rho / 4
    x1sq_d2u = p2 * rho * rho / 4.0 + p1 * 3.0 * rho / 4.0
    return 0.5 * x1sq_d2u * H1(pair)


def x1sq_d2u(pair: OrderedPair, fd_step: float = 1e-6) -> float:
    """``x1^2 * d2_{x1 x1} u`` alone (bounded by a multiple of sqrt(h))."""
    return 2.0 * K0(pair, fd_step) / max(H1(pair), 1e-300)


DELTA_WEIGHTS = ("1", "sqrt_h", "sqrt_h_plus_h")


def _weight_fn(name: str) -> Callable[[np.ndarray], np.ndarray]:
    # weights are normalised to equal 1 at h = 1 (required for the
    # concentration limit to hit the test value exactly)
    if name == "1":
        return lambda h: np.ones_like(h)
    if name == "sqrt_h":
        return np.sqrt
    if name == "sqrt_h_plus_h":
        return lambda h: 0.5 * (np.sqrt(h) + h)
    raise DomainError(f"unknown weight {name!r}; use one of {DELTA_WEIGHTS}")


def delta_test(
    T: float,
    phi: Callable[[np.ndarray, np.ndarray], np.ndarray],
    weight: str = "1",
    rel_tol: float = 1e-6,
    budget: int = 4_000_000,
) -> QuadratureResult:
    """Concentration integral of the weighted kernel against a test function.

    Computes ``int w(h) H1(identity; T, xi) phi(xi) d xi`` over ``xi_1 > 0``,
    ``xi_2 > 0`` in the square-root / invariant-ratio coordinates where the
    integrand is a Gaussian-like bump at (1, 1); as ``T`` decreases the value
    approaches ``phi(1, 0)``.  ``phi`` must be bounded continuous and accept
    arrays.
    """
    if T <= 0:
        raise DomainError("T must be positive")
    wfn = _weight_fn(weight)
    pref = _SQRT12 / (math.pi * T)

    def integrand(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        # chi = u/(1-u), eta = v/(1-v) maps the quarter plane to the unit square
        one_u = 1.0 - u
        one_v = 1.0 - v
        chi = u / one_u
        eta = v / one_v
        jac = 1.0 / (one_u * one_u * one_v * one_v)
        # panel grids repeat eta along the first axis; invert it only once per row
        if eta.ndim == 2 and eta.shape[0] > 1 and np.array_equal(eta[0], eta[-1]):
            G_vals = np.broadcast_to(G_array(eta[0]), eta.shape)
        else:
            G_vals = G_array(eta.ravel()).reshape(eta.shape)
        expo = -2.0 * (eta * (chi + 1.0 / chi - 2.0) + G_vals) / T
        vals = np.where(
            expo > _LOG_FLOOR,
            np.exp(np.maximum(expo, _LOG_FLOOR))
            * pref
            * wfn(eta)
            / (eta * eta * chi * chi)
            * phi(chi * chi, T * chi / eta)
            * jac,
            0.0,
        )
        return vals

    eps = 1e-9
    return integrate_rect(integrand, (eps, 1.0 - eps, eps, 1.0 - eps), rel_tol=rel_tol, budget=budget)

"""Group structure, invariants and optimal curves of the control problem.

Space-time points ``(t, x1, x2)`` with ``x1 > 0`` form a non-commutative Lie
group under ``z o w = (t+T, x1*y1, x2 + y2*x1)``; the generator of the
diffusion is left-invariant for it.  The ordering ``z < w`` (strictly earlier
time, strictly smaller second coordinate) delimits where a steering control
exists, and everything downstream is parameterised by the scale-invariant
ratio ``h = (T-t) sqrt(x1 y1) / (y2 - x2)``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .scalar_kernels import PI_SQ, g_inv

__all__ = [
    "GroupPoint",
    "OrderedPair",
    "ControlData",
    "CurveSample",
    "IDENTITY",
    "compose",
    "inverse",
    "h_invariant",
    "control_data",
    "optimal_curve",
    "curve_point",
    "curve_cost",
]


@dataclass(frozen=True)
class GroupPoint:
    """A space-time point ``(t, x1, x2)`` with ``x1 > 0``."""

    t: float
    x1: float
    x2: float

    def __post_init__(self):
        if not (self.x1 > 0.0) or not math.isfinite(self.x1):
            raise DomainError(f"x1 must be positive and finite, got {self.x1}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t, self.x1, self.x2)


IDENTITY = GroupPoint(0.0, 1.0, 0.0)


@dataclass(frozen=True)
class OrderedPair:
    """A pair ``z < w``: strictly increasing time and second coordinate."""

    z: GroupPoint
    w: GroupPoint

    def __post_init__(self):
        if not (self.z.t < self.w.t):
            raise DomainError(f"need z.t < w.t, got {self.z.t} >= {self.w.t}")
        if not (self.z.x2 < self.w.x2):
            raise DomainError(f"need z.x2 < w.x2, got {self.z.x2} >= {self.w.x2}")

    @property
    def dt(self) -> float:
        return self.w.t - self.z.t


def compose(z: GroupPoint, w: GroupPoint) -> GroupPoint:
    """Group product ``z o w = (t+T, x1*y1, x2 + y2*x1)``."""
    return GroupPoint(z.t + w.t, z.x1 * w.x1, z.x2 + w.x2 * z.x1)


def inverse(z: GroupPoint) -> GroupPoint:
    """Group inverse ``(-t, 1/x1, -x2/x1)``."""
    return GroupPoint(-z.t, 1.0 / z.x1, -z.x2 / z.x1)


def h_invariant(pair: OrderedPair) -> float:
    """Scale-invariant ratio ``(T-t) sqrt(x1 y1) / (y2 - x2)``."""
    z, w = pair.z, pair.w
    return pair.dt * math.sqrt(z.x1 * w.x1) / (w.x2 - z.x2)


@dataclass(frozen=True)
class ControlData:
    """Energy ``E``, sign ``sigma_sign`` and shooting constant ``k`` of a pair."""

    E: float
    sigma_sign: int
    k: float
    h: float


def control_data(pair: OrderedPair) -> ControlData:
    """Conserved energy, sign split and shooting constant of the optimal curve.

    ``E = 4 g_inv(1/h) / (T-t)^2``.  The shooting constant is fixed by the
    endpoint conditions: ``k = 2 (sqrt(y1/x1) - c) / s`` where ``(c, s)`` is
    the cosh-type / sinh-type pair of ``E (T-t)^2 / 4``.  For
    ``E >= -pi^2/(T-t)^2`` this equals ``2 y1/(y2-x2) - sqrt(E + 4 x1 y1/(y2-x2)^2)``;
    below that threshold the cosh-type factor is negative and the same
    endpoint conditions force ``2 y1/(y2-x2) + sqrt(...)`` instead.
    """
    z, w = pair.z, pair.w
    dt = pair.dt
    h = h_invariant(pair)
    gi = g_inv(1.0 / h).value
    E = 4.0 * gi / (dt * dt)
    if h < 0.5 * math.pi:
        sign = 1
    elif h == 0.5 * math.pi:
        sign = 0
    else:
        sign = -1
    c_f, s_over = _cs_pair(np.array([gi]))
    stilde_f = dt * float(s_over[0])  # equals (y2 - x2)/sqrt(x1 y1)
    k = 2.0 * (math.sqrt(w.x1 / z.x1) - float(c_f[0])) / stilde_f
    return ControlData(E=E, sigma_sign=sign, k=k, h=h)


@dataclass(frozen=True)
class CurveSample:
    """Discretised optimal trajectory with its control values."""

    times: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    omega: np.ndarray
    E: float
    k: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("s,gamma1,gamma2,omega\n")
        for s, g1, g2, om in zip(self.times, self.gamma1, self.gamma2, self.omega):
            buf.write(f"{s!r},{g1!r},{g2!r},{om!r}\n")
        return buf.getvalue()


# When |E| (T-s)^2 / 4 falls below this, the cosh/cos pair is evaluated by
# its even power series, which degenerates smoothly to the zero-energy branch.
_SERIES_CUT = 1e-6


def _cs_pair(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(cosh-type, sinh-type/argument) pair of q = E tau^2 / 4, any sign of E.

    Returns ``(c, s)`` with ``c = cosh(sqrt(q))`` and ``s = sinh(sqrt(q))/sqrt(q)``
    continued through ``q <= 0`` by the trigonometric branch.
    """
    q = np.asarray(q, dtype=float)
    c = np.empty_like(q)
    s = np.empty_like(q)
    small = np.abs(q) <= _SERIES_CUT
    if small.any():
        qs = q[small]
        c[small] = 1.0 + qs * (0.5 + qs * (1.0 / 24.0 + qs / 720.0))
        s[small] = 1.0 + qs * (1.0 / 6.0 + qs * (1.0 / 120.0 + qs / 5040.0))
    pos = (q > 0) & ~small
    if pos.any():
        x = np.sqrt(q[pos])
        c[pos] = np.cosh(x)
        s[pos] = np.sinh(x) / x
    neg = (q < 0) & ~small
    if neg.any():
        m = np.sqrt(-q[neg])
        c[neg] = np.cos(m)
        s[neg] = np.sin(m) / m
    return c, s


def optimal_curve(pair: OrderedPair, n_points: int = 201) -> CurveSample:
    """Closed-form optimal trajectory sampled on a uniform time grid.

    The three energy branches share one analytic form once the hyperbolic /
    trigonometric pair is written as an even series in ``E (T-s)^2``, so no
    case split is needed and the zero-energy limit is exact.  The control is
    the analytic log-derivative of the first component.
    """
    if n_points < 2:
        raise DomainError("n_points must be >= 2")
    data = control_data(pair)
    E, k = data.E, data.k
    z, w = pair.z, pair.w
    if E <= -4.0 * PI_SQ / (pair.dt * pair.dt):
        raise DomainError("energy below the admissible threshold")
    times = np.linspace(z.t, w.t, n_points)
    tau = w.t - times
    q = 0.25 * E * tau * tau
    c, s_over = _cs_pair(q)
    stilde = tau * s_over  # (2/sqrt(E)) sinh(tau sqrt(E)/2)
    Q = c + 0.5 * k * stilde
    gamma1 = w.x1 / (Q * Q)
    gamma2 = w.x2 - w.x1 * stilde / Q
    omega = (0.5 * E * stilde + k * c) / Q
    return CurveSample(times=times, gamma1=gamma1, gamma2=gamma2, omega=omega, E=E, k=k)


def curve_point(pair: OrderedPair, s: float) -> tuple[float, float]:
    """Optimal-curve position at one interior time, without sampling a grid."""
    z, w = pair.z, pair.w
    if not (z.t <= s <= w.t):
        raise DomainError("s must lie in [t, T]")
    data = control_data(pair)
    tau = w.t - s
    q = 0.25 * data.E * tau * tau
    c, s_over = _cs_pair(np.array([q]))
    stilde = tau * float(s_over[0])
    Q = float(c[0]) + 0.5 * data.k * stilde
    return w.x1 / (Q * Q), w.x2 - w.x1 * stilde / Q


def curve_cost(curve: CurveSample) -> float:
    """Composite-Simpson integral of ``omega^2`` over the time grid."""
    t = curve.times
    y = curve.omega**2
    n = t.size
    if n < 2:
        raise DomainError("curve must have at least two samples")
    h = (t[-1] - t[0]) / (n - 1)
    if n % 2 == 1:
        w = np.ones(n)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return float(h / 3.0 * (w @ y))
    # even sample count: Simpson on the first n-1 points, trapezoid on the tail
    w = np.ones(n - 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * (w @ y[:-1]) + 0.5 * h * (y[-2] + y[-1]))

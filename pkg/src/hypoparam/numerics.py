"""Shared numerical infrastructure.

Root finding, deterministic adaptive quadrature on intervals and rectangles,
reproducible Monte Carlo integration over counter-based RNG streams, finite
differences and the lower real branch of ``v * exp(v)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BracketError, DomainError, EvaluationError

__all__ = [
    "QuadratureResult",
    "MCResult",
    "RngStream",
    "find_root_bracketed",
    "lambert_w_lower",
    "lambert_w_lower_from_log",
    "integrate_1d",
    "integrate_rect",
    "mc_integrate",
    "central_diff",
    "pairwise_sum",
    "map_half_line",
]

DEFAULT_REL_TOL_1D = 1e-10
DEFAULT_ABS_TOL_1D = 1e-12
DEFAULT_REL_TOL_2D = 1e-7


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True

    def __post_init__(self):
        if self.error_estimate < 0 or self.evaluations < 1:
            raise DomainError("invalid QuadratureResult fields")


@dataclass(frozen=True)
class MCResult:
    mean: float
    std_error: float
    n: int
    rejected: int = 0


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream keyed by (seed, stream_id).

    Identical keys reproduce identical draw sequences regardless of how work
    is scheduled, which keeps parallel batches bit-reproducible.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = (int(self.seed) & (2**64 - 1)) | ((int(self.stream_id) & (2**64 - 1)) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, i: int) -> "RngStream":
        return RngStream(self.seed, (int(self.stream_id) * 0x9E3779B97F4A7C15 + i + 1) & (2**64 - 1))


def _check_finite(value: float, where: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite value in {where}: {value!r}")
    return value


def find_root_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    fprime: Callable[[float], float] | None = None,
    max_iter: int = 200,
) -> float:
    """Root of ``f`` on [lo, hi] by Newton/secant steps safeguarded by bisection.

    Requires a sign change over the bracket.  Steps that leave the current
    bracket, or that fail to shrink it fast enough, fall back to bisection,
    so the returned point always lies inside [lo, hi].  Terminates when
    ``|f(r)| <= tol * (1 + |r|)`` or the bracket width drops below ``tol``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    a, b = float(lo), float(hi)
    if not (a < b):
        raise DomainError("need lo < hi")
    fa = _check_finite(f(a), "find_root_bracketed")
    fb = _check_finite(f(b), "find_root_bracketed")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={fa!r}, {fb!r}")

    x, fx = (a, fa) if abs(fa) <= abs(fb) else (b, fb)
    x_prev, fx_prev = (b, fb) if x == a else (a, fa)
    for _ in range(max_iter):
        if abs(fx) <= tol * (1.0 + abs(x)) or (b - a) <= tol:
            return x
        # candidate step: Newton if a derivative is available, else secant
        step_ok = False
        if fprime is not None:
            d = fprime(x)
            if math.isfinite(d) and d != 0.0:
                cand = x - fx / d
                step_ok = a < cand < b
        else:
            denom = fx - fx_prev
            if denom != 0.0:
                cand = x - fx * (x - x_prev) / denom
                step_ok = a < cand < b
        if not step_ok or cand in (a, b):
            cand = 0.5 * (a + b)
        fc = _check_finite(f(cand), "find_root_bracketed")
        x_prev, fx_prev = x, fx
        x, fx = cand, fc
        if fx == 0.0:
            return x
        if fa * fx < 0:
            b, fb = x, fx
        else:
            a, fa = x, fx
    return x


def lambert_w_lower(nu: float) -> float:
    """Lower real solution of ``v * exp(v) = nu`` for ``-1/e <= nu < 0``.

    This is the branch with ``v <= -1`` (the smaller of the two negative
    solutions); solved to 1e-12 relative accuracy.
    """
    nu = float(nu)
    if not (-1.0 / math.e <= nu < 0.0):
        raise DomainError(f"lambert_w_lower requires -1/e <= nu < 0, got {nu}")
    return lambert_w_lower_from_log(math.log(-nu))


def lambert_w_lower_from_log(log_neg_nu: float) -> float:
    """Same branch as :func:`lambert_w_lower`, taking ``log(-nu)`` directly.

    Accepting the logarithm keeps the solve well-posed when ``nu`` itself
    would underflow.  Solves ``v + log(-v) = log(-nu)`` on ``v <= -1``.
    """
    L = float(log_neg_nu)
    if L > -1.0 + 1e-12:
        if L > -1.0 + 1e-9:
            raise DomainError(f"log(-nu) must be <= -1, got {L}")
        return -1.0
    # g(v) = v + log(-v) is increasing on (-inf, -1]; bracket below by
    # pushing the asymptotic guess v ~ L - log(-L) further out.
    hi = -1.0
    lo = L - math.log(-L) - 2.0 if L < -2.0 else -4.0
    while lo + math.log(-lo) > L:
        lo *= 2.0
    g = lambda v: v + math.log(-v) - L
    gp = lambda v: 1.0 + 1.0 / v
    return find_root_bracketed(g, lo, hi, tol=1e-14, fprime=gp)


# Nested Clenshaw-Curtis pair: the 5-point nodes are a subset of the 9-point
# nodes, so each panel costs 9 evaluations (1D) / 81 (2D).
def _cc_nodes_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    # nodes x_k = cos(k pi / (n-1)) on [-1, 1], exact CC weights via DCT sum
    m = n - 1
    k = np.arange(n)
    x = np.cos(np.pi * k / m)
    w = np.zeros(n)
    for i in range(n):
        acc = 1.0
        for j in range(1, m // 2 + 1):
            b = 2.0 if 2 * j < m else 1.0
            acc -= b * math.cos(2.0 * j * np.pi * i / m) / (4.0 * j * j - 1.0)
        w[i] = 2.0 * acc / m
    w[0] *= 0.5
    w[-1] *= 0.5
    return x[::-1].copy(), w[::-1].copy()


_CC9_X, _CC9_W = _cc_nodes_weights(9)
_CC5_IDX = np.array([0, 2, 4, 6, 8])
_CC5_W = _cc_nodes_weights(5)[1]


def _eval_panel_1d(f, a: float, b: float) -> tuple[float, float, float]:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    xs = mid + half * _CC9_X
    ys = np.asarray(f(xs), dtype=float)
    if ys.shape != xs.shape:
        raise EvaluationError("integrand must map arrays to arrays of the same shape")
    if not np.all(np.isfinite(ys)):
        raise EvaluationError("integrand produced non-finite values")
    fine = half * float(_CC9_W @ ys)
    coarse = half * float(_CC5_W @ ys[_CC5_IDX])
    return fine, abs(fine - coarse), float(np.max(np.abs(ys)))


def integrate_1d(
    f: Callable,
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL_1D,
    abs_tol: float = DEFAULT_ABS_TOL_1D,
    budget: int = 200_000,
) -> QuadratureResult:
    """Adaptive panel-bisection quadrature with a nested 9/5-point rule.

    The integrand is evaluated on arrays of nodes; plain scalar callables are
    handled too.  Deterministic: panels split largest-error first with a
    fixed tie-break.
    """
    f = _ensure_array_callable_1d(f)
    fine, err, _ = _eval_panel_1d(f, a, b)
    evals = 9
    heap = [(-err, 0, a, b, fine, err)]
    counter = 1
    total, total_err = fine, err
    while heap and evals + 18 <= budget:
        if total_err <= max(abs_tol, rel_tol * abs(total)):
            break
        neg_err, _, pa, pb, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        lf, le, _ = _eval_panel_1d(f, pa, mid)
        rf, re, _ = _eval_panel_1d(f, mid, pb)
        evals += 18
        total += lf + rf - pval
        total_err += le + re - perr
        heapq.heappush(heap, (-le, counter, pa, mid, lf, le))
        heapq.heappush(heap, (-re, counter + 1, mid, pb, rf, re))
        counter += 2
    converged = total_err <= max(abs_tol, rel_tol * abs(total))
    return QuadratureResult(total, max(total_err, 0.0), evals, converged)


def _ensure_array_callable_1d(f: Callable) -> Callable:
    try:
        probe = np.asarray(f(np.array([0.5, 0.25])), dtype=float)
        if probe.shape == (2,):
            return f
    except Exception:
        pass
    return np.vectorize(f, otypes=[float])


def _ensure_array_callable_2d(f: Callable) -> Callable:
    try:
        probe = np.asarray(
            f(np.array([0.25, 0.5]), np.array([0.5, 0.75])), dtype=float
        )
        if probe.shape == (2,):
            return f
    except Exception:
        pass
    return np.vectorize(f, otypes=[float])


def _eval_panel_2d(f, rect) -> tuple[float, float]:
    a1, b1, a2, b2 = rect
    m1, h1 = 0.5 * (a1 + b1), 0.5 * (b1 - a1)
    m2, h2 = 0.5 * (a2 + b2), 0.5 * (b2 - a2)
    X = m1 + h1 * _CC9_X[:, None]
    Y = m2 + h2 * _CC9_X[None, :]
    Z = np.asarray(f(np.broadcast_to(X, (9, 9)), np.broadcast_to(Y, (9, 9))), dtype=float)
    if Z.shape != (9, 9):
        raise EvaluationError("integrand must broadcast over node grids")
    if not np.all(np.isfinite(Z)):
        raise EvaluationError("integrand produced non-finite values")
    fine = h1 * h2 * float(_CC9_W @ Z @ _CC9_W)
    sub = Z[np.ix_(_CC5_IDX, _CC5_IDX)]
    coarse = h1 * h2 * float(_CC5_W @ sub @ _CC5_W)
    return fine, abs(fine - coarse)


def integrate_rect(
    f: Callable,
    rect: tuple[float, float, float, float],
    rel_tol: float = DEFAULT_REL_TOL_2D,
    abs_tol: float = DEFAULT_ABS_TOL_1D,
    budget: int = 2_000_000,
) -> QuadratureResult:
    """Adaptive quadrature over the rectangle [a1,b1] x [a2,b2].

    Panels are alternately bisected along their longer side.  If the budget
    runs out first, the value so far is returned flagged non-converged.
    """
    a1, b1, a2, b2 = (float(v) for v in rect)
    if not (math.isfinite(a1) and math.isfinite(b1) and math.isfinite(a2) and math.isfinite(b2)):
        raise DomainError("integrate_rect requires a finite rectangle")
    f = _ensure_array_callable_2d(f)
    fine, err = _eval_panel_2d(f, (a1, b1, a2, b2))
    evals = 81
    heap = [(-err, 0, (a1, b1, a2, b2), fine, err)]
    counter = 1
    total, total_err = fine, err
    while heap and evals + 162 <= budget:
        if total_err <= max(abs_tol, rel_tol * abs(total)):
            break
        neg_err, _, r, pval, perr = heapq.heappop(heap)
        ra1, rb1, ra2, rb2 = r
        if (rb1 - ra1) >= (rb2 - ra2):
            m = 0.5 * (ra1 + rb1)
            sub1, sub2 = (ra1, m, ra2, rb2), (m, rb1, ra2, rb2)
        else:
            m = 0.5 * (ra2 + rb2)
            sub1, sub2 = (ra1, rb1, ra2, m), (ra1, rb1, m, rb2)
        v1, e1 = _eval_panel_2d(f, sub1)
        v2, e2 = _eval_panel_2d(f, sub2)
        evals += 162
        total += v1 + v2 - pval
        total_err += e1 + e2 - perr
        heapq.heappush(heap, (-e1, counter, sub1, v1, e1))
        heapq.heappush(heap, (-e2, counter + 1, sub2, v2, e2))
        counter += 2
    converged = total_err <= max(abs_tol, rel_tol * abs(total))
    return QuadratureResult(total, max(total_err, 0.0), evals, converged)


def pairwise_sum(x: np.ndarray) -> float:
    """Recursive pairwise (cascade) summation; order-stable reduction."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n == 0:
        return 0.0
    if n <= 8:
        return float(math.fsum(x.tolist()))
    half = n // 2
    return pairwise_sum(x[:half]) + pairwise_sum(x[half:])


def mc_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    n: int,
    stream: RngStream | np.random.Generator,
    chunk: int = 1 << 18,
) -> MCResult:
    """Monte Carlo mean of ``f`` over points drawn by ``sampler``.

    ``sampler(gen, m)`` must return ``m`` points (an array whose leading axis
    has length ``m``); ``f`` maps that array to ``m`` values.  The mean and
    the standard error use pairwise reductions, so chunked evaluation matches
    a single-shot evaluation to floating-point reduction accuracy.  Samples
    evaluating non-finite are rejected and counted.
    """
    if n < 2:
        raise DomainError("mc_integrate requires n >= 2")
    gen = stream.generator() if isinstance(stream, RngStream) else stream
    sums: list[float] = []
    sq_sums: list[float] = []
    rejected = 0
    kept = 0
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        pts = sampler(gen, m)
        vals = np.asarray(f(pts), dtype=float)
        good = np.isfinite(vals)
        rejected += int(m - good.sum())
        vals = vals[good]
        kept += vals.size
        sums.append(pairwise_sum(vals))
        sq_sums.append(pairwise_sum(vals * vals))
        remaining -= m
    if kept < 2:
        raise EvaluationError("fewer than two finite samples")
    total = pairwise_sum(np.array(sums))
    total_sq = pairwise_sum(np.array(sq_sums))
    mean = total / kept
    var = max(total_sq / kept - mean * mean, 0.0) * kept / (kept - 1)
    return MCResult(mean, math.sqrt(var / kept), kept, rejected)


def central_diff(f: Callable[[float], float], x: float, order: int, h: float) -> float:
    """Central finite difference: 4th-order first derivative, 2nd-order second."""
    if h <= 0:
        raise DomainError("h must be positive")
    if order == 1:
        num = (
            f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)
        )
        return _check_finite(num, "central_diff") / (12.0 * h)
    if order == 2:
        num = f(x + h) - 2.0 * f(x) + f(x - h)
        return _check_finite(num, "central_diff") / (h * h)
    raise DomainError("order must be 1 or 2")


def map_half_line(u: np.ndarray, offset: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Map u in (0,1) to offset + u/(1-u); returns (x, dx/du)."""
    u = np.asarray(u, dtype=float)
    one_minus = 1.0 - u
    return offset + u / one_minus, 1.0 / (one_minus * one_minus)

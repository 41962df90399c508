"""Exact-rational combinatorial kernel.

Everything here is computed with :class:`fractions.Fraction` and projected to
floats only at the boundary.  The series coefficients that drive the
elementary expansions of the optimal cost decay to ~1e-7 by order 38 while
intermediate quantities carry ``6**k / k!`` factors, so a floating-point
recursion loses most significant digits to cancellation; exact arithmetic
side-steps the issue entirely.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from pathlib import Path

from .errors import DomainError

__all__ = [
    "Rational",
    "CoeffTable",
    "bell_partial",
    "lah",
    "stirling2",
    "compute_beta",
    "compute_coeffs",
    "load_coeffs",
    "cache_path",
]

# Exactness carrier: always in lowest terms with a positive denominator.
Rational = Fraction

CACHE_ENV_VAR = "HP_CACHE_DIR"


def bell_partial(n: int, h: int, x: list[Rational]) -> Rational:
    """Partial exponential Bell polynomial ``B_{n,h}(x_1, ..., x_{n-h+1})``.

    Uses the standard recurrence
    ``B_{n,h} = sum_j C(n-1, j-1) x_j B_{n-j, h-1}``.
    """
    if h < 1 or h > n:
        raise DomainError(f"bell_partial requires 1 <= h <= n, got n={n}, h={h}")
    if len(x) < n - h + 1:
        raise DomainError(f"bell_partial needs {n - h + 1} arguments, got {len(x)}")
    return _bell_row(n, list(x))[h]


def _bell_row(n_max: int, x: list[Rational]) -> list[Rational]:
    """Internal: column ``B_{n_max, h}`` for h = 0..n_max, via the full table."""
    table = _bell_table(n_max, x)
    return table[n_max]


def _bell_table(n_max: int, x: list[Rational]) -> list[list[Rational]]:
    """All ``B_{n,h}`` for 0 <= h <= n <= n_max with arguments ``x`` (1-based x_j)."""
    zero = Fraction(0)
    table = [[zero] * (n_max + 1) for _ in range(n_max + 1)]
    table[0][0] = Fraction(1)
    for n in range(1, n_max + 1):
        for h in range(1, n + 1):
            acc = Fraction(0)
            # j ranges over the size of the block containing element n
            for j in range(1, n - h + 2):
                xj = x[j - 1]
                if xj:
                    prev = table[n - j][h - 1]
                    if prev:
                        acc += comb(n - 1, j - 1) * xj * prev
            table[n][h] = acc
    return table


def lah(n: int, h: int) -> Rational:
    """Unsigned Lah number ``L(n,h) = C(n-1,h-1) * n! / h!``."""
    if h < 1 or h > n:
        raise DomainError(f"lah requires 1 <= h <= n, got n={n}, h={h}")
    return Fraction(comb(n - 1, h - 1) * factorial(n), factorial(h))


def stirling2(h: int, k: int) -> Rational:
    """Stirling number of the second kind ``{h brace k}``."""
    if k < 0 or k > h:
        raise DomainError(f"stirling2 requires 0 <= k <= h, got h={h}, k={k}")
    return Fraction(_stirling2_table(h)[h][k])


def _stirling2_table(h_max: int) -> list[list[int]]:
    table = [[0] * (h_max + 1) for _ in range(h_max + 1)]
    table[0][0] = 1
    for h in range(1, h_max + 1):
        for k in range(1, h + 1):
            table[h][k] = k * table[h - 1][k] + table[h - 1][k - 1]
    return table


def compute_beta(N: int) -> list[Rational]:
    """Taylor coefficients at 1 of the inverse of ``sum_n z^n / (2n+1)!``.

    Returns ``[beta_0, beta_1, ..., beta_N]`` with ``beta_0 = 0`` and
    ``beta_1 = 6``; the remaining entries follow the Bell-polynomial
    recursion with arguments ``j! / (2j+1)!``.
    """
    if N < 1:
        raise DomainError("compute_beta requires N >= 1")
    args = [Fraction(factorial(j), factorial(2 * j + 1)) for j in range(1, N + 1)]
    bell = _bell_table(N, args)
    beta: list[Rational] = [Fraction(0), Fraction(6)]
    for k in range(2, N + 1):
        acc = Fraction(0)
        for h in range(1, k):
            acc += factorial(h) * beta[h] * bell[k][h]
        beta.append(-Fraction(6**k, factorial(k)) * acc)
    return beta


# Coefficients of sqrt(1+x) = 1 + sum_h s_h x^h scaled so that the h-th
# derivative at 0 equals h! * s_h; the recursions consume h! * s_h directly.
def _sqrt_series_factor(h: int) -> Rational:
    return Fraction((-1) ** h * factorial(2 * h), (1 - 2 * h) * factorial(h) * 4**h)


@dataclass(frozen=True)
class CoeffTable:
    """Exact coefficient table for the elementary cost expansions.

    ``a``/``b`` are the coefficients of the two-sided basis whose directional
    pieces are ``(eta-1)^n / eta^(n-1)`` and ``(-log eta)^n / (1-log eta)^(n-2)``;
    ``b_tilde`` replaces the latter exponent with ``n-1`` (the below-one basis
    that bounds the cost from below).  Lists are indexed so that ``a[n]`` is
    the order-``n`` coefficient; entries below the first valid order are zero.
    Intermediates are kept for the oracle tests and are ``None`` when the
    table was loaded from a cache file.
    """

    N: int
    beta: list[Rational]
    a: list[Rational]
    b: list[Rational]
    b_tilde: list[Rational]
    c: list[Rational] | None = None
    d: list[Rational] | None = None
    e: list[Rational] | None = None
    e_tilde: list[Rational] | None = None
    f: list[Rational] | None = None

    def a_float(self, n: int) -> float:
        return float(self.a[n])

    def b_float(self, n: int) -> float:
        return float(self.b[n])

    def b_tilde_float(self, n: int) -> float:
        return float(self.b_tilde[n])

    def a_floats(self) -> list[float]:
        """Float projection [a_2, ..., a_N]."""
        return [float(v) for v in self.a[2:]]

    def b_floats(self) -> list[float]:
        return [float(v) for v in self.b[2:]]

    def b_tilde_floats(self) -> list[float]:
        return [float(v) for v in self.b_tilde[2:]]


def compute_coeffs(N: int) -> CoeffTable:
    """Full exact coefficient table through order ``N`` (N >= 2)."""
    if N < 2:
        raise DomainError("compute_coeffs requires N >= 2")
    beta = compute_beta(N)
    beta_shift = [Fraction(0)] + beta  # beta_shift[k+1] = beta_k, handles beta_{-1}

    def b_at(k: int) -> Rational:
        return beta_shift[k + 1] if k >= -1 else Fraction(0)

    sqrt_fac = [_sqrt_series_factor(h) for h in range(N + 1)]

    # a_n via the square-root composition over (1-xi)^2 * ginv(1-xi)
    c = [b_at(n) + 2 * b_at(n - 1) + b_at(n - 2) for n in range(N + 1)]
    bell_c = _bell_table(N, [factorial(j) * c[j] for j in range(1, N + 1)])
    a: list[Rational] = [Fraction(0)] * (N + 1)
    for n in range(2, N + 1):
        acc = Fraction(0)
        for h in range(1, n + 1):
            acc += sqrt_fac[h] * bell_c[n][h]
        a[n] = (-1) ** n * (b_at(n) + b_at(n - 1) - Fraction(2, factorial(n)) * acc)

    # b_n via the exp/log change of variable: d, e, e_tilde, f intermediates
    lah_tab = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    for n in range(1, N + 1):
        for h in range(1, n + 1):
            lah_tab[n][h] = lah(n, h)
    st2 = _stirling2_table(N)

    # inner sums sum_k beta_k k! {h brace k} reused across n
    inner = [Fraction(0)] * (N + 1)
    for h in range(1, N + 1):
        inner[h] = sum(
            (beta[k] * factorial(k) * st2[h][k] for k in range(1, h + 1)),
            Fraction(0),
        )

    d = [Fraction(0)] * (N + 1)
    e = [Fraction(0)] * (N + 1)
    e_tilde = [Fraction(0)] * (N + 1)
    for n in range(1, N + 1):
        inv_nf = Fraction(1, factorial(n))
        d[n] = inv_nf * sum((lah_tab[n][h] * inner[h] for h in range(1, n + 1)), Fraction(0))
        e[n] = inv_nf * sum(((-1) ** h * lah_tab[n][h] for h in range(1, n + 1)), Fraction(0))
        e_tilde[n] = inv_nf * sum(
            ((-2) ** h * lah_tab[n][h] for h in range(1, n + 1)), Fraction(0)
        )

    bell_de = _bell_table(
        N, [factorial(j) * (d[j] + e_tilde[j]) for j in range(1, N + 1)]
    )
    f = [Fraction(0)] * (N + 1)
    for n in range(1, N + 1):
        f[n] = Fraction(1, factorial(n)) * sum(
            (sqrt_fac[h] * bell_de[n][h] for h in range(1, n + 1)), Fraction(0)
        )

    def second_diff(seq: list[Rational], n: int) -> Rational:
        # seq[n-2] - 2 seq[n-1] + seq[n] with zero padding below index 0
        def at(k: int) -> Rational:
            return seq[k] if k >= 0 else Fraction(0)

        return at(n - 2) - 2 * at(n - 1) + at(n)

    b: list[Rational] = [Fraction(0)] * (N + 1)
    for n in range(2, N + 1):
        b[n] = second_diff(d, n) + 2 * (second_diff(e, n) - second_diff(f, n))

    # The below-one lower-bound basis differs from the b-basis by one power of
    # (1 - log eta); in the series variable this is division by (1 - xi), so
    # its coefficients are the running partial sums of the b_n.
    b_tilde: list[Rational] = [Fraction(0)] * (N + 1)
    acc = Fraction(0)
    for n in range(2, N + 1):
        acc += b[n]
        b_tilde[n] = acc

    return CoeffTable(
        N=N, beta=beta, a=a, b=b, b_tilde=b_tilde, c=c, d=d, e=e, e_tilde=e_tilde, f=f
    )


def cache_path(N: int, cache_dir: str | os.PathLike | None = None) -> Path:
    """Location of the JSON cache file for order ``N``."""
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV_VAR)
    if cache_dir is None:
        cache_dir = Path.home() / ".cache" / "hypoparam"
    return Path(cache_dir) / f"coeffs-N{N}.json"


def _encode(seq: list[Rational]) -> list[list[str]]:
    return [[str(v.numerator), str(v.denominator)] for v in seq]


def _decode(seq: list[list[str]]) -> list[Rational]:
    return [Fraction(int(num), int(den)) for num, den in seq]


def save_coeffs(table: CoeffTable, cache_dir: str | os.PathLike | None = None) -> Path:
    path = cache_path(table.N, cache_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "N": table.N,
        "a": _encode(table.a),
        "b": _encode(table.b),
        "b_tilde": _encode(table.b_tilde),
        "beta": _encode(table.beta),
    }
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(payload))
    tmp.replace(path)
    return path


def load_coeffs(N: int, cache_dir: str | os.PathLike | None = None) -> CoeffTable:
    """Load the order-``N`` table from cache, computing and caching on miss."""
    path = cache_path(N, cache_dir)
    if path.exists():
        payload = json.loads(path.read_text())
        if payload.get("N") == N:
            return CoeffTable(
                N=N,
                beta=_decode(payload["beta"]),
                a=_decode(payload["a"]),
                b=_decode(payload["b"]),
                b_tilde=_decode(payload["b_tilde"]),
            )
    table = compute_coeffs(N)
    save_coeffs(table, cache_dir)
    return table

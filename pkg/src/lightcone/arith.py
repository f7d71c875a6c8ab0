"""Exact integer and character arithmetic.

Kronecker symbols, p-adic valuations, primitive real Dirichlet characters,
quadratic Gauss sums, the auxiliary constants a_k and b_k, and representation
counts r_k(m) for sums of squares.  Everything here is exact integer or
root-of-unity arithmetic; the only floating point is the final sqrt in the
Gauss sum evaluations and the large-m representation tables.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np


class BudgetError(Exception):
    """Raised when an enumeration exceeds its configured work budget."""


def _e(x: float) -> complex:
    """The unit-circle exponential e(x) = exp(2 pi i x)."""
    return cmath.exp(2j * math.pi * x)


def kronecker(D: int, k: int) -> int:
    """Kronecker symbol (D/k), defined for all integer pairs.

    Completely multiplicative in k.  Agrees with the Legendre symbol for odd
    prime k, with (D/2) = 0 for even D and (-1)^((D^2-1)/8) for odd D, and
    with (D/-1) = -1 exactly when D < 0.
    """
    if k == 0:
        return 1 if D in (1, -1) else 0
    sign = 1
    if k < 0:
        if D < 0:
            sign = -sign
        k = -k
    while k % 2 == 0:
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            sign = -sign
        k //= 2
    if k == 1:
        return sign
    # Jacobi symbol for odd k > 1, by reciprocity with 2-adic reduction.
    D %= k
    while D != 0:
        while D % 2 == 0:
            D //= 2
            if k % 8 in (3, 5):
                sign = -sign
        D, k = k, D
        if D % 4 == 3 and k % 4 == 3:
            sign = -sign
        D %= k
    return sign if k == 1 else 0


def valuation(m: int, p: int) -> int:
    """Largest v >= 0 with p^v dividing m; m must be nonzero."""
    if m == 0:
        raise ValueError("infinite valuation")
    v = 0
    m = abs(m)
    while m % p == 0:
        m //= p
        v += 1
    return v


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n >= 1 as (prime, exponent) pairs, ascending."""
    if n < 1:
        raise ValueError("factorize requires n >= 1")
    out: list[tuple[int, int]] = []
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        out.append((n, 1))
    return out


def _squarefree_kernel(t: int) -> int:
    """Product of the primes dividing positive t an odd number of times."""
    return math.prod(p for p, e in factorize(t) if e % 2 == 1)


@dataclass(frozen=True)
class CharSpec:
    """A primitive real Dirichlet character, stored as an explicit value table.

    D is the defining integer (nonzero, not 3 mod 4), q the conductor,
    parity_a is 0 for even and 1 for odd characters, and values[j] holds
    chi(j) for j mod q.
    """

    D: int
    q: int
    parity_a: int
    values: tuple[int, ...]

    def __call__(self, k: int) -> int:
        return self.values[k % self.q]


_CHAR_TABLE_BUDGET = 10 ** 5


def _check_primitive(q: int, values: tuple[int, ...]) -> None:
    # chi induced from a proper divisor q' of q would be constant on each
    # unit residue class mod q'; reject any such collapse.
    for qp in range(1, q):
        if q % qp != 0:
            continue
        collapses = True
        for r in range(qp):
            seen = {values[j] for j in range(r, q, qp) if math.gcd(j, q) == 1}
            if len(seen) > 1:
                collapses = False
                break
        if collapses:
            raise ValueError(f"character table is induced from modulus {qp}, not primitive")


def char_from_D(D: int) -> CharSpec:
    """The primitive real character inducing k -> kronecker(D, k).

    The conductor is 8|D0|, 4|D0| or |D0|, where D0 is the signed squarefree
    kernel of the odd part of D, according to whether the 2-adic valuation of
    D is odd, or even with D0 = 3 mod 4, or even with D0 = 1 mod 4.
    """
    if D == 0:
        raise ValueError("no character defined: D = 0")
    if D % 4 == 3:
        raise ValueError("no character defined: D = 3 (mod 4)")
    alpha2 = valuation(D, 2)
    t2 = abs(D) >> alpha2
    d0 = _squarefree_kernel(t2)
    if D < 0:
        d0 = -d0
    if alpha2 % 2 == 1:
        arg, q = 8 * d0, 8 * abs(d0)
    elif d0 % 4 == 1:
        arg, q = d0, abs(d0)
    else:
        arg, q = 4 * d0, 4 * abs(d0)
    if q > _CHAR_TABLE_BUDGET:
        raise BudgetError(f"character conductor {q} exceeds table budget")
    values = tuple(kronecker(arg, j) for j in range(q))
    _check_primitive(q, values)
    return CharSpec(D=D, q=q, parity_a=1 if D < 0 else 0, values=values)


def gauss_sum_odd(a: int, b: int) -> complex:
    """Quadratic Gauss sum over v mod a of e(b v^2 / a), for odd positive a
    coprime to 2b.  Evaluates in closed form as eps_a sqrt(a) (b/a), where
    eps_a is 1 for a = 1 mod 4 and i for a = 3 mod 4.
    """
    if a <= 0 or a % 2 == 0 or math.gcd(a, 2 * b) != 1:
        raise ValueError("gauss_sum_odd requires odd positive a with gcd(a, 2b) = 1")
    eps = 1 + 0j if a % 4 == 1 else 1j
    return eps * math.sqrt(a) * kronecker(b, a)


def gauss_sum_pow2(k: int, b: int) -> complex:
    """Quadratic Gauss sum over v mod 2^k of e(b v^2 / 2^k), for odd b.

    Vanishes for k = 1; equals 2^(k/2) (1 + e(b/4)) for even k and
    2^((k+1)/2) e(b/8) for odd k > 1.
    """
    if k < 1:
        raise ValueError("gauss_sum_pow2 requires k >= 1")
    if b % 2 == 0:
        raise ValueError("gauss_sum_pow2 requires odd b")
    if k == 1:
        return 0j
    if k % 2 == 0:
        return 2 ** (k // 2) * (1 + _e((b % 4) / 4))
    return 2 ** ((k + 1) // 2) * _e((b % 8) / 8)


def ab_const(k: int) -> tuple[complex, float]:
    """The pair (a_k, b_k) with a_k = (1+i)^k + (1-i)^k and b_k the sum of
    e(v k / 8) over the four odd residues v mod 8.

    Both admit closed forms: b_k is 4 (-1)^(k/4) when 4 | k and 0 otherwise;
    a_k vanishes for k = 2 mod 4, equals (-1)^(k/4) 2^(k/2+1) for 4 | k, and
    (-1)^((k^2-1)/8) 2^((k+1)/2) for odd k.
    """
    if k < 0:
        raise ValueError("ab_const requires k >= 0")
    if k % 4 == 0:
        a = (-1) ** (k // 4) * 2 ** (k // 2 + 1)
        b = (-1) ** (k // 4) * 4
    elif k % 4 == 2:
        a, b = 0, 0
    else:
        a = (-1) ** ((k * k - 1) // 8) * 2 ** ((k + 1) // 2)
        b = 0
    return complex(a), float(b)


@dataclass(frozen=True)
class PadicData:
    """p-adic shape of a nonzero integer vector m.

    alpha_p is the p-adic valuation of |m|^2, ell_p that of gcd(m), and t_p
    the prime-to-p part of |m|^2.  Always alpha_p >= 2 ell_p and p does not
    divide t_p.
    """

    p: int
    alpha_p: int
    ell_p: int
    t_p: int


def padic_data(m: tuple[int, ...], p: int) -> PadicData:
    """PadicData of the integer vector m at the prime p."""
    norm2 = sum(x * x for x in m)
    if norm2 == 0:
        raise ValueError("infinite valuation")
    alpha = valuation(norm2, p)
    ell = valuation(math.gcd(*m), p)
    data = PadicData(p=p, alpha_p=alpha, ell_p=ell, t_p=norm2 // p ** alpha)
    assert data.alpha_p >= 2 * data.ell_p
    return data


# ---------------------------------------------------------------------------
# Sums of squares.  r_k(m) counts integer k-tuples with squared norm m; the
# tables below build r_k from r_(k-1) by adding one coordinate at a time.

_INT_TABLES: dict[int, np.ndarray] = {}
_FLOAT_TABLES: dict[int, np.ndarray] = {}


def _square_counts(M: int, dtype: type) -> np.ndarray:
    out = np.zeros(M + 1, dtype=dtype)
    out[0] = 1
    xs = np.arange(1, math.isqrt(M) + 1)
    out[xs * xs] = 2
    return out


def _extend_by_one_coordinate(prev: np.ndarray) -> np.ndarray:
    M = len(prev) - 1
    acc = np.zeros_like(prev)
    for x in range(1, math.isqrt(M) + 1):
        acc[x * x:] += prev[: M + 1 - x * x]
    return prev + 2 * acc


def _rk_int_table(k: int, M: int) -> np.ndarray:
    """Exact int64 table of r_k(0..M); overflow-safe only for k <= 4."""
    cached = _INT_TABLES.get(k)
    if cached is not None and len(cached) > M:
        return cached
    table = _square_counts(M, np.int64)
    for _ in range(k - 1):
        table = _extend_by_one_coordinate(table)
    _INT_TABLES[k] = table
    return table


def _rk_float_table(k: int, M: int) -> np.ndarray:
    """float64 table of r_k(0..M).

    Exact while the counts stay below 2^53 (true for k <= 6 at M up to a few
    million); beyond that the relative error is a small multiple of machine
    epsilon per accumulation pass.
    """
    cached = _FLOAT_TABLES.get(k)
    if cached is not None and len(cached) > M:
        return cached
    table = _square_counts(M, np.float64)
    for _ in range(k - 1):
        table = _extend_by_one_coordinate(table)
    _FLOAT_TABLES[k] = table
    return table


def _conv_prefix(a: list[int], b: list[int], M: int) -> list[int]:
    return [sum(a[j] * b[i - j] for j in range(i + 1)) for i in range(M + 1)]


def r_k(k: int, m: int, budget: int = 10 ** 6) -> int:
    """Number of integer k-tuples (x_1, ..., x_k) with x_1^2 + ... + x_k^2 = m.

    Exact.  Large k uses a split sum over two half-dimensional tables, so the
    budget caps the table length; deep splits (k > 8) are restricted to small
    m because they fall back to full integer convolutions.
    """
    if k < 1:
        raise ValueError("r_k requires k >= 1")
    if m < 0:
        raise ValueError("r_k requires m >= 0")
    if m > budget:
        raise BudgetError(f"representation count at m = {m} exceeds budget {budget}")
    if m == 0:
        return 1
    if k <= 4:
        return int(_rk_int_table(k, m)[m])
    if k <= 8:
        lo = _rk_int_table(4, m)[: m + 1].tolist()
        hi = _rk_int_table(k - 4, m)[: m + 1].tolist()
        return sum(hi[j] * lo[m - j] for j in range(m + 1))
    if m > 2000:
        raise BudgetError(f"representation count for k = {k} limited to m <= 2000")
    base = (k - 1) % 4 + 1
    table = _rk_int_table(4, m)[: m + 1].tolist()
    cur = _rk_int_table(base, m)[: m + 1].tolist()
    for _ in range((k - base) // 4):
        cur = _conv_prefix(cur, table, m)
    return cur[m]


def r_k_prefix(k: int, M: int) -> np.ndarray:
    """Exact int64 array of r_k(0), ..., r_k(M) in one pass (k <= 4 only;
    the higher-k counts overflow int64 within the table ranges used here)."""
    if not 1 <= k <= 4:
        raise ValueError("r_k_prefix supports 1 <= k <= 4")
    if M < 0:
        raise ValueError("r_k_prefix requires M >= 0")
    return _rk_int_table(k, M)[: M + 1].copy()

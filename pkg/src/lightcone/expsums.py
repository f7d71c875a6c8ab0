"""Quadratic exponential sums in n variables.

The congruence sums phi_n (squared norm divisible by t) and varphi_n (squared
norm congruent to -1), their prime-power split F(k, i), the composite sums
phi_{n,d}(t; lambda), and the unit-averaged character sums S(d1, chi, m).
Every closed form here has a brute-force companion that evaluates the
defining sum directly; phases are always reduced to exact integer residues
before exponentiating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import (
    BudgetError,
    PadicData,
    ab_const,
    factorize,
    gauss_sum_odd,
    kronecker,
    padic_data,
    valuation,
)

# naive enumeration size bound (modulus^dimension), per documented contract
PHI_NAIVE_BUDGET = 10 ** 8
# bound on the actual work of the coordinate-factored evaluation
FUBINI_BUDGET = 2 * 10 ** 9


@lru_cache(maxsize=64)
def _roots(N: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(N) / N)


_PI_LD = np.longdouble("3.14159265358979323846264338327950288")


@lru_cache(maxsize=64)
def _roots_extended(N: int) -> np.ndarray:
    # extended-precision roots keep cancellation error in the split sums
    # well below the comparison tolerances
    theta = 2 * _PI_LD * np.arange(N, dtype=np.longdouble) / N
    return np.cos(theta) + 1j * np.sin(theta)


def _vec(m, n: int) -> tuple[int, ...]:
    m = tuple(int(x) for x in m)
    if len(m) != n:
        raise ValueError(f"vector has length {len(m)}, expected {n}")
    return m


def _congruence_sum(n: int, N: int, m: tuple[int, ...], c: int) -> complex:
    """Sum of e(m.h / N) over h in (Z/NZ)^n with |h|^2 = -c (mod N).

    Evaluated exactly by averaging the congruence indicator over b mod N,
    which factors the h-sum through the coordinates.
    """
    if N == 1:
        return 1 + 0j
    if N ** n > PHI_NAIVE_BUDGET:
        raise BudgetError(f"budget exceeded: modulus {N} in dimension {n}")
    if n * N * N > FUBINI_BUDGET:
        raise BudgetError(f"budget exceeded: modulus {N} in dimension {n}")
    roots = _roots(N)
    v = np.arange(N, dtype=np.int64)
    v2 = (v * v) % N
    mres = [x % N for x in m]
    c %= N
    total = 0j
    for b in range(N):
        bv2 = (b * v2) % N
        prod = roots[(b * c) % N]
        cache: dict[int, complex] = {}
        for cj in mres:
            g = cache.get(cj)
            if g is None:
                g = complex(roots[(bv2 + cj * v) % N].sum())
                cache[cj] = g
            prod *= g
            if prod == 0:
                break
        total += prod
    return total / N


def phi_brute(n: int, t: int, m) -> complex:
    """Defining sum of phi_n(t; m): e(m.h/t) over |h|^2 = 0 (mod t)."""
    if t < 1:
        raise ValueError("phi_brute requires t >= 1")
    return _congruence_sum(n, t, _vec(m, n), 0)


def varphi_brute(n: int, t: int, m) -> complex:
    """Defining sum of varphi_n(t; m): e(m.h/t) over |h|^2 = -1 (mod t)."""
    if t < 1:
        raise ValueError("varphi_brute requires t >= 1")
    return _congruence_sum(n, t, _vec(m, n), 1)


def varphi_closed_prime(n: int, p: int, m) -> complex:
    """Closed form of varphi_n(p; m) at an odd prime p.

    The b = 0 term contributes p^(n-1) exactly when p divides m; the rest is
    a quadratic Gauss sum twisted by e((b - inv(4b) |m|^2) / p).
    """
    if p == 2 or p < 2:
        raise ValueError("varphi_closed_prime requires an odd prime")
    m = _vec(m, n)
    norm2 = sum(x * x for x in m)
    roots = _roots(p)
    inv4 = pow(4, -1, p)
    gauss_n = gauss_sum_odd(p, 1) ** n
    total = 0j
    for b in range(1, p):
        binv = pow(b, -1, p)
        phase = (b - inv4 * binv * norm2) % p
        total += kronecker(b, p) ** (n % 2) * roots[phase]
    total *= gauss_n / p
    if all(x % p == 0 for x in m):
        total += p ** (n - 1)
    return total


def F_brute(n: int, p: int, k: int, i: int, m) -> complex:
    """Defining double sum F(k, i) at the prime p, coordinate-factored."""
    if not 0 <= i <= k:
        raise ValueError("F requires 0 <= i <= k")
    m = _vec(m, n)
    if k == 0:
        return 1 + 0j
    if p ** (k * n) > PHI_NAIVE_BUDGET or n * p ** (2 * k - i) > FUBINI_BUDGET:
        raise BudgetError(f"budget exceeded: F({k},{i}) at p = {p}, n = {n}")
    pk = p ** k
    roots = _roots_extended(pk)
    v = np.arange(pk, dtype=np.int64)
    quad = (p ** i * ((v * v) % pk)) % pk
    mres = [x % pk for x in m]
    mod_b = p ** (k - i)
    bs = [b for b in range(mod_b) if math.gcd(b, p) == 1] if mod_b > 1 else [0]
    total = np.clongdouble(0)
    one = np.clongdouble(1)
    for b in bs:
        bquad = (b * quad) % pk
        prod = one
        cache: dict[int, np.clongdouble] = {}
        for cj in mres:
            g = cache.get(cj)
            if g is None:
                g = roots[(bquad + cj * v) % pk].sum()
                cache[cj] = g
            prod = prod * g
            if prod == 0:
                break
        total = total + prod
    return complex(total / pk)


def _b_const(k: int) -> float:
    # b_k depends only on k mod 8, which also covers negative indices
    return ab_const(k % 8)[1]


def _a_const(k: int) -> complex:
    return ab_const(k)[0]


def _f2_generic(n: int, k: int, i: int) -> complex:
    # p = 2, the range i <= k <= alpha - i - 2 (all k when m = 0)
    if k == i:
        return complex(2.0 ** ((n - 1) * k))
    if k == i + 1:
        return 0j
    if (k - i) % 2 == 0:
        return 2.0 ** ((n * k + (n - 2) * i - 4) // 2) * _a_const(n)
    return complex(2.0 ** ((n * (k + 1) + (n - 2) * i - 6) // 2) * _b_const(n))


def F_closed(n: int, p: int, k: int, i: int, m) -> complex:
    """Closed form of F(k, i) covering every sub-case at odd p and p = 2."""
    if not 0 <= i <= k:
        raise ValueError("F requires 0 <= i <= k")
    m = _vec(m, n)
    if k == 0:
        return 1 + 0j
    zero = all(x == 0 for x in m)
    if not zero:
        data = padic_data(m, p)
        alpha, ell, t = data.alpha_p, data.ell_p, data.t_p
        if i > ell:
            return 0j
    if p == 2:
        if zero:
            return _f2_generic(n, k, i)
        if i == ell:
            if k == ell:
                return complex(2.0 ** ((n - 1) * ell))
            if k == ell + 1:
                if all((x >> ell) % 2 == 1 for x in m):
                    return complex(2.0 ** ((n - 1) * (ell + 1)))
                return 0j
            return 0j
        # now 0 <= i <= ell - 1, so alpha >= 2 ell >= 2i + 2
        if k >= alpha - i + 2:
            return 0j
        if k == alpha - i + 1:
            if alpha % 2 == 0:
                return complex(2.0 ** ((n * (k + 1) + (n - 2) * i - 6) // 2) * _b_const(n - t))
            return 0j
        if k == alpha - i:
            if alpha % 2 == 0:
                sign = (-1) ** ((t + 1) // 2)
                return 2.0 ** ((n * k + (n - 2) * i - 6) // 2) * sign * _a_const(n + 2)
            return complex(2.0 ** ((n * (k + 1) + (n - 2) * i - 6) // 2) * _b_const(n - 2 * t))
        if k == alpha - i - 1:
            if alpha % 2 == 0:
                if (alpha, i) == (2 * ell, ell - 1):
                    return 0j
                return complex(-(2.0 ** ((n * (k + 1) + (n - 2) * i - 6) // 2)) * _b_const(n))
            return -(2.0 ** ((n * k + (n - 2) * i - 4) // 2)) * _a_const(n)
        return _f2_generic(n, k, i)
    # odd p
    if n % 2 == 0 or (k - i) % 2 == 0:
        chi_pow = kronecker(-4, p) ** ((n * (k - i)) // 2) if n % 2 == 0 else 1
        if zero or k <= alpha - i:
            totient = p ** (k - i) - p ** (k - i - 1) if k > i else 1
            return complex(chi_pow * p ** ((n * k + n * i - 2 * k) // 2) * totient)
        if k == alpha - i + 1:
            return complex(-chi_pow * p ** ((n * k + (n - 2) * i - 2) // 2))
        return 0j
    # n odd and k - i odd: a single surviving diagonal
    if not zero and k == alpha - i + 1:
        sym = kronecker((-1) ** ((n - 1) // 2) * t, p)
        return complex(sym * p ** ((n * k + (n - 2) * i - 1) // 2))
    return 0j


def phi_prime_power(n: int, p: int, k: int, m) -> complex:
    """phi_n(p^k; m) as the sum of the closed forms F(k, i), i = 0..k."""
    if k < 0:
        raise ValueError("phi_prime_power requires k >= 0")
    if k == 0:
        return 1 + 0j
    return sum(F_closed(n, p, k, i, m) for i in range(k + 1))


# ---------------------------------------------------------------------------
# Dual lattice vectors: m = 2 lambda with all entries of the same parity.

@dataclass(frozen=True)
class DualVector:
    """A nonzero dual-lattice vector, stored doubled as the integer vector m.

    All entries of m share one parity.  PadicData is cached for every prime
    dividing 2 |m|^2, and delta_lambda records whether m / 2^{ell_2} has all
    entries odd.
    """

    n: int
    m: tuple[int, ...]
    padic: tuple[PadicData, ...]
    delta_lambda: int

    @property
    def norm2(self) -> int:
        return sum(x * x for x in self.m)

    def at(self, p: int) -> PadicData:
        for data in self.padic:
            if data.p == p:
                return data
        return PadicData(p=p, alpha_p=0, ell_p=0, t_p=self.norm2)


def dual_vector(m) -> DualVector:
    """Validate and package m = 2 lambda for a dual-lattice vector lambda."""
    m = tuple(int(x) for x in m)
    n = len(m)
    if n == 0 or all(x == 0 for x in m):
        raise ValueError("dual_vector requires a nonzero vector")
    if len({x % 2 for x in m}) != 1:
        raise ValueError("dual_vector requires all entries of the same parity")
    norm2 = sum(x * x for x in m)
    primes = [2] + [p for p, _ in factorize(norm2) if p % 2 == 1]
    padic = tuple(padic_data(m, p) for p in primes)
    ell2 = padic[0].ell_p
    delta = 1 if all((x >> ell2) % 2 == 1 for x in m) else 0
    if n % 2 == 1:
        D = (-1) ** ((n - 1) // 2) * norm2
        assert D % 4 != 3
    return DualVector(n=n, m=m, padic=padic, delta_lambda=delta)


# ---------------------------------------------------------------------------
# Composite sums.

def _varphi_composite(n: int, M: int, w: tuple[int, ...]) -> complex:
    """varphi_n(M; w) for squarefree M, split by twisted multiplicativity.

    Each prime factor p receives the argument scaled by the inverse of the
    complementary cofactor mod p; the factor at p = 2 needs all entries of w
    to share one parity.
    """
    if M == 1:
        return 1 + 0j
    out = 1 + 0j
    for p, e in factorize(M):
        if e != 1:
            raise ValueError("varphi factorization requires squarefree modulus")
        cbar = pow(M // p, -1, p)
        wp = tuple(cbar * x for x in w)
        if p == 2:
            if len({x % 2 for x in w}) != 1:
                raise ValueError("varphi at 2 requires entries of equal parity")
            out *= (-1) ** (w[0] % 2) * 2 ** (n - 1)
        else:
            out *= varphi_closed_prime(n, p, wp)
    return out


def _check_odd_squarefree(d: int) -> None:
    if d < 1 or d % 2 == 0:
        raise ValueError("modulus must be odd and squarefree")
    if any(e > 1 for _, e in factorize(d)):
        raise ValueError("modulus must be odd and squarefree")


def phi_nd(n: int, d: int, t: int, lam: DualVector | None, method: str = "closed") -> complex:
    """The composite sum phi_{n,d}(t; lambda).

    "closed" splits off a = gcd(t, 2d) and multiplies phi_n(at; m) by
    varphi_n(2d/a; t m); "brute" evaluates the defining congruence sum over
    (Z/2tdZ)^n with squared norm -t^2.
    """
    _check_odd_squarefree(d)
    if t < 1:
        raise ValueError("phi_nd requires t >= 1")
    m = lam.m if lam is not None else (0,) * n
    if lam is not None and lam.n != n:
        raise ValueError("dimension mismatch")
    if method == "brute":
        return _congruence_sum(n, 2 * t * d, m, t * t)
    if method != "closed":
        raise ValueError("method must be 'closed' or 'brute'")
    a = math.gcd(t, 2 * d)
    out = 1 + 0j
    for p, e in factorize(a * t):
        out *= phi_prime_power(n, p, e, m)
    # the remaining factor sees the argument scaled by the inverse of a,
    # the cofactor left over from splitting the full modulus 2td = (at)(2d/a)
    M2 = (2 * d) // a
    abar = pow(a, -1, M2) if M2 > 1 else 0
    w = tuple(abar * x for x in m)
    return out * _varphi_composite(n, M2, w)


def S_sum(d1: int, chi, m) -> complex:
    """The unit-averaged sum of varphi_n(d1; t m) against the conjugate of
    chi(t), for odd squarefree d1 and a character chi of modulus d1."""
    _check_odd_squarefree(d1)
    if getattr(chi, "q", None) != d1:
        raise ValueError("modulus mismatch between d1 and chi")
    m = tuple(int(x) for x in m)
    n = len(m)
    total = 0j
    for t in range(1, d1 + 1):
        if math.gcd(t, d1) != 1:
            continue
        total += _varphi_composite(n, d1, tuple(t * x for x in m)) * complex(chi(t)).conjugate()
    return total

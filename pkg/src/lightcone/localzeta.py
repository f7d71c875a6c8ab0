"""Local factors at a single prime and the epsilon-factors built from them.

The basic objects are the local Dirichlet series

    Z_p(s)  = sum_{k >= 0} chi(p)^k  phi_n(p^k; m)     p^(-k s),
    Zt_p(s) = sum_{k >= 0} chi(p)^(k+2) phi_n(p^(k+2); m) p^(-(k+1) s),

whose coefficients are the prime-power exponential sums of
:mod:`lightcone.expsums`.  For a nonzero frequency vector both series are
finite polynomials in p^(-s); for the zero vector they are genuinely
infinite and admit closed rational forms.  This module provides

* exact polynomial constructors (:func:`Z_local_factor`, :func:`Zt_local_factor`)
  and their evaluators (:func:`Z_series`, :func:`Zt_series`),
* closed rational forms for the zero-vector factors
  (:func:`Z_const_closed`, :func:`Zc_const_closed`) and for the ramified
  nonzero-vector factors (:func:`Z_ramified_closed`, :func:`Z2_closed`,
  :func:`calZ2`),
* the epsilon-factors that multiply Dirichlet L-values in the Fourier
  coefficients of the light-cone series (:func:`eps_const`,
  :func:`eps_lambda`, :func:`eps_p_lambda`) together with the reflection
  identity check :func:`eps_functional_eq_residual`,
* a small Dirichlet-character table type (:class:`Character`,
  :func:`characters_mod`) for odd squarefree moduli.

All closed forms are rational functions of p^(-s) = exp(-s ln p) with the
principal logarithm.  Geometric partial sums such as (1 - q^m)/(1 - q) are
always evaluated as the polynomial 1 + q + ... + q^(m-1), so the closed
forms stay finite at the removable points q = 1; any remaining denominator
that comes within 1e-8 of zero raises ``ValueError("local pole")``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as _iproduct

from .arith import CharSpec, ab_const, char_from_D, factorize, kronecker
from .expsums import DualVector, S_sum, _varphi_composite, phi_nd, phi_prime_power

__all__ = [
    "POLE_GUARD",
    "LocalFactor",
    "Character",
    "characters_mod",
    "trivial_character",
    "sign_n",
    "discriminant",
    "Z_local_factor",
    "Zt_local_factor",
    "Z_series",
    "Zt_series",
    "Z_const_closed",
    "Zc_const_closed",
    "Z_ramified_closed",
    "Z2_closed",
    "calZ2",
    "eps_p_const",
    "eps_const",
    "eps_p_lambda",
    "eps_lambda",
    "eps_functional_eq_residual",
    "unramified_local_model",
    "Z_lambda_divisor_part",
    "Z_lambda_composite",
    "Z_lambda_series",
]

#: Denominators of closed rational forms smaller than this raise "local pole".
POLE_GUARD = 1e-8


def _nonzero(den: complex) -> complex:
    """Return ``den`` unless it sits inside the pole guard band."""
    if abs(den) < POLE_GUARD:
        raise ValueError("local pole")
    return den


def _geom(q: complex, m: int) -> complex:
    """The partial geometric sum 1 + q + ... + q^(m-1)  (equal to
    (1 - q^m)/(1 - q) away from q = 1, but finite everywhere)."""
    if m < 0:
        raise ValueError("geometric sum length must be nonnegative")
    total = 0j
    power = 1 + 0j
    for _ in range(m):
        total += power
        power *= q
    return total


def _msign(k: int) -> int:
    """(-1)**k for any integer k, negative values included."""
    return -1 if k % 2 else 1


def sign_n(n: int) -> int:
    """The eight-periodic sign attached to the dimension ``n``:
    +1 for n = 0 mod 4, (-1)^((n-2)/4) for n = 2 mod 4, and
    (-1)^((n^2-1)/8) for odd n."""
    if n % 4 == 0:
        return 1
    if n % 4 == 2:
        return _msign((n - 2) // 4)
    return _msign((n * n - 1) // 8)


def _b8(k: int) -> float:
    # the eight-periodic constant b_k; negative indices reduce mod 8
    return ab_const(k % 8)[1]


@lru_cache(maxsize=None)
def _chiD(D: int) -> CharSpec:
    return char_from_D(D)


def discriminant(lam: DualVector) -> int:
    """Signed discriminant (-1)^((n-1)/2) * ||m||^2 attached to a frequency
    vector in odd dimension n (its square class determines the quadratic
    character entering the odd-dimension local factors)."""
    if lam.n % 2 == 0:
        raise ValueError("discriminant requires odd dimension")
    return _msign((lam.n - 1) // 2) * lam.norm2


def _check_modulus(d: int) -> None:
    if d < 1 or d % 2 == 0 or any(e > 1 for _, e in factorize(d)):
        raise ValueError("modulus must be a positive odd squarefree integer")


def _chi4pow(p: int, e: int) -> int:
    """kronecker(-4, p)**e reduced to +-1 (p odd)."""
    return kronecker(-4, p) if e % 2 else 1


# ---------------------------------------------------------------------------
# local factors as explicit polynomials / series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalFactor:
    """A local factor at ``p``: a polynomial in X = p^(-s), divided by a
    product of binomials 1 - c * p^(a - b*s).

    ``numerator[k]`` is the coefficient of X^k; each entry ``(c, a, b)`` of
    ``denominator_terms`` contributes the factor 1 - c * p^a * (p^-s)^b.
    """

    p: int
    numerator: tuple[complex, ...]
    denominator_terms: tuple[tuple[complex, float, float], ...] = ()

    def __call__(self, s: complex) -> complex:
        s = complex(s)
        x = self.p ** (-s)
        num = 0j
        for coeff in reversed(self.numerator):
            num = num * x + coeff
        den = 1 + 0j
        for c, a, b in self.denominator_terms:
            den *= _nonzero(1 - c * self.p ** (a - b * s))
        return num / den

    @property
    def degree(self) -> int:
        """Degree of the numerator polynomial (ignoring trailing zeros)."""
        deg = len(self.numerator) - 1
        while deg > 0 and self.numerator[deg] == 0:
            deg -= 1
        return deg


def Z_local_factor(
    n: int,
    p: int,
    chi_p: complex = 1,
    lam: DualVector | None = None,
    kmax: int = 40,
) -> LocalFactor:
    """The local series sum_k chi_p^k phi_n(p^k; m) X^k as an explicit
    polynomial in X = p^(-s).

    For ``lam`` a nonzero frequency vector the sum terminates exactly at
    degree alpha_p + 1 (higher coefficients vanish identically); for
    ``lam=None`` (the zero vector) the series is infinite and is truncated
    at degree ``kmax``.
    """
    if lam is not None:
        top = lam.at(p).alpha_p + 1
        m = lam.m
    else:
        top = int(kmax)
        m = (0,) * n
    chi_p = complex(chi_p)
    coeffs = []
    for k in range(top + 1):
        coeffs.append(chi_p**k * complex(phi_prime_power(n, p, k, m)))
    return LocalFactor(p=p, numerator=tuple(coeffs))


def Zt_local_factor(
    n: int,
    p: int,
    chi_p: complex = 1,
    lam: DualVector | None = None,
    kmax: int = 40,
) -> LocalFactor:
    """The shifted tail sum_k chi_p^(k+2) phi_n(p^(k+2); m) X^(k+1) as a
    polynomial in X = p^(-s) (degree at most alpha_p for a nonzero vector,
    truncated at ``kmax`` for the zero vector)."""
    if lam is not None:
        top = lam.at(p).alpha_p - 1
        m = lam.m
    else:
        top = int(kmax)
        m = (0,) * n
    chi_p = complex(chi_p)
    coeffs: list[complex] = [0j]
    for k in range(top + 1):
        coeffs.append(chi_p ** (k + 2) * complex(phi_prime_power(n, p, k + 2, m)))
    return LocalFactor(p=p, numerator=tuple(coeffs))


def Z_series(
    n: int,
    p: int,
    s: complex,
    chi_p: complex = 1,
    lam: DualVector | None = None,
    kmax: int = 40,
) -> complex:
    """Evaluate the local series Z_p(s) directly from its coefficients
    (exactly, when ``lam`` is a nonzero vector)."""
    return Z_local_factor(n, p, chi_p, lam, kmax)(s)


def Zt_series(
    n: int,
    p: int,
    s: complex,
    chi_p: complex = 1,
    lam: DualVector | None = None,
    kmax: int = 40,
) -> complex:
    """Evaluate the shifted tail Zt_p(s) directly from its coefficients."""
    return Zt_local_factor(n, p, chi_p, lam, kmax)(s)


# ---------------------------------------------------------------------------
# closed forms at the zero frequency vector
# ---------------------------------------------------------------------------


def Z_const_closed(n: int, p: int, s: complex) -> complex:
    """Closed rational form of the zero-vector local factor Z_p(s; 0)."""
    s = complex(s)
    if p == 2:
        a_n, b_n = ab_const(n)
        num = (
            1
            - 2 ** (n - 2 * s)
            + a_n * 2 ** (n - 2 - 2 * s)
            + b_n * 2 ** (2 * n - 3 - 3 * s)
        )
        den = _nonzero(1 - 2 ** (n - 1 - s)) * _nonzero(1 - 2 ** (n - 2 * s))
        return num / den
    if n % 2 == 0:
        c = _chi4pow(p, n // 2)
        num = 1 - c * p ** (n / 2 - 1 - s)
        den = _nonzero(1 - p ** (n - 1 - s)) * _nonzero(1 - c * p ** (n / 2 - s))
        return num / den
    num = 1 - p ** (n - 1 - 2 * s)
    den = _nonzero(1 - p ** (n - 2 * s)) * _nonzero(1 - p ** (n - 1 - s))
    return num / den


def Zc_const_closed(n: int, p: int, s: complex) -> complex:
    """Closed rational form of the completed zero-vector factor
    varphi_n(p; 0) + Zt_p(s; 0) (the combination that multiplies the
    unramified Euler product in the constant term)."""
    s = complex(s)
    if p == 2:
        if n % 4 == 0:
            num = 1 - (1 - _msign(n // 4)) * 2 ** (n / 2 - s)
            den = _nonzero(1 - 2 ** (n - 1 - s)) * _nonzero(1 - 2 ** (n / 2 - s))
        elif n % 4 == 2:
            num = 1 + 0j
            den = _nonzero(1 - 2 ** (n - 1 - s))
        else:
            eps = _msign((n - 1) // 4) if n % 4 == 1 else _msign((n + 1) // 4)
            num = 1 - 2 ** (n - 2 * s) + eps * 2 ** ((n - 1) / 2 - s)
            den = _nonzero(1 - 2 ** (n - 1 - s)) * _nonzero(1 - 2 ** (n - 2 * s))
        return 2 ** (n - 1) * num / den
    if n % 2 == 0:
        c = _chi4pow(p, n // 2)
        num = (
            p ** (n - 1)
            + p ** (n - s)
            - c * p ** (n / 2 - 1)
            - p ** (2 * n - 1 - 2 * s)
        )
        den = _nonzero(1 - p ** (n - 1 - s)) * _nonzero(1 - c * p ** (n / 2 - s))
        return num / den
    c = _chi4pow(p, (n + 1) // 2)
    num = (1 - c * p ** ((n - 1) / 2 - s)) * (
        p ** (n - s) + p ** (n - 1) + c * p ** ((n - 1) / 2) - p ** (2 * n - 1 - 2 * s)
    )
    den = _nonzero(1 - p ** (n - 2 * s)) * _nonzero(1 - p ** (n - 1 - s))
    return num / den


# ---------------------------------------------------------------------------
# closed forms at a nonzero frequency vector
# ---------------------------------------------------------------------------


def Z_ramified_closed(n: int, p: int, s: complex, lam: DualVector) -> complex:
    """Closed rational form of Z_p(s; m) at an odd prime for the trivial
    character.  Exact (a polynomial identity in p^(-s)); for p not dividing
    ||m||^2 it degenerates to the single linear factor."""
    if p == 2:
        raise ValueError("Z_ramified_closed requires an odd prime")
    if lam is None:
        raise ValueError("Z_ramified_closed requires a nonzero frequency vector")
    s = complex(s)
    data = lam.at(p)
    alpha, ell = data.alpha_p, data.ell_p
    geometric1 = _geom(p ** (n - 1 - s), ell + 1)
    geometric2 = _geom(p ** (s - 1), ell + 1)
    if n % 2 == 0:
        c = _chi4pow(p, n // 2)
        prefac = (1 - c * p ** (n / 2 - 1 - s)) / _nonzero(1 - c * p ** (n / 2 - s))
        bracket = geometric1 - _chi4pow(p, (n // 2) * (alpha + 1)) * p ** (
            (n / 2 - s) * (alpha + 1)
        ) * geometric2
        return prefac * bracket
    if alpha % 2 == 1:
        prefac = (1 - p ** (n - 1 - 2 * s)) / _nonzero(1 - p ** (n - 2 * s))
        bracket = geometric1 - p ** ((n / 2 - s) * (alpha + 1)) * geometric2
        return prefac * bracket
    chD = _chiD(discriminant(lam))(p)
    first = (1 + chD * p ** ((n - 1) / 2 - s)) / _nonzero(1 - p ** (n - 2 * s))
    bracket = (1 - chD * p ** ((n - 1) / 2 - s)) * geometric1 + chD * p ** (
        (n / 2 - s) * (alpha + 1) - 0.5
    ) * (1 - chD * p ** ((n + 1) / 2 - s)) * geometric2
    return first * bracket


def Z2_closed(n: int, s: complex, lam: DualVector) -> complex:
    """Closed rational form of the local factor at p = 2 for a nonzero
    frequency vector (trivial character).

    When the minimal 2-valuation of the entries is ell = 0 every coefficient
    beyond degree one vanishes and the factor is exactly 1 + 2^(n-1-s); the
    general rational form below applies for ell >= 1.
    """
    s = complex(s)
    data = lam.at(2)
    alpha, ell, t = data.alpha_p, data.ell_p, data.t_p
    delta = lam.delta_lambda
    if ell == 0:
        return 1 + 2 ** (n - 1 - s)
    a_n, b_n = ab_const(n)
    mix = a_n / 4 + b_n * 2 ** (n - 3 - s)
    lead = _geom(2 ** (n - 1 - s), ell + 1) + delta * 2 ** ((n - 1 - s) * (ell + 1))
    if alpha % 2 == 1:
        third = (
            2 ** (n - 2 * s)
            * mix
            * _geom(2 ** (n - 1 - s), ell)
            / _nonzero(1 - 2 ** (n - 2 * s))
        )
        inner = (
            a_n / 4
            - _b8(n - 2 * t) * 2 ** (n - 3 - s)
            + mix / _nonzero(1 - 2 ** (n - 2 * s))
        )
        fourth = -(2 ** ((n / 2 - s) * (alpha - 1)) * _geom(2 ** (s - 1), ell) * inner)
        return lead + third + fourth
    short = ell - (1 if alpha == 2 * ell else 0)
    third = (
        2 ** (n - 2 * s)
        * mix
        * _geom(2 ** (n - 1 - s), short)
        / _nonzero(1 - 2 ** (n - 2 * s))
    )
    fourth = (
        2 ** ((n / 2 - s) * alpha)
        * _geom(2 ** (s - 1), ell)
        * (_msign((t + 1) // 2) * ab_const(n + 2)[0] / 8 + _b8(n - t) * 2 ** (n - 3 - s))
    )
    fifth = -(
        2 ** ((n / 2 - s) * alpha)
        * _geom(2 ** (s - 1), short)
        * (2 ** (s - 2) * b_n + mix / _nonzero(1 - 2 ** (n - 2 * s)))
    )
    return lead + third + fourth + fifth


def _calZ2_poly(n: int, s: complex, lam: DualVector) -> complex:
    """Definitional evaluation of the normalized p = 2 factor
    (-1)^(m_1) + 2^(1-n) Zt_2(s; m) — a finite polynomial in 2^(-s),
    free of denominators."""
    sign = -1 if lam.m[0] % 2 else 1
    return sign + 2 ** (1 - n) * Zt_series(n, 2, complex(s), 1, lam)


def calZ2(n: int, s: complex, lam: DualVector, method: str = "closed") -> complex:
    """The normalized p = 2 factor (-1)^(m_1) + 2^(1-n) Zt_2(s; m).

    ``method="closed"`` uses the explicit rational form (four cases by the
    parity of alpha and the residue of n mod 4); ``method="relation"``
    recovers the same value from :func:`Z2_closed` via the identity
    calZ2 = 2^(1-n+s) (Z_2 - 1) + (-1)^(m_1) - 1.  The two routes are
    independent and are cross-checked in the test-suite.
    """
    s = complex(s)
    if method == "relation":
        sign = -1 if lam.m[0] % 2 else 1
        return 2 ** (1 - n + s) * (Z2_closed(n, s, lam) - 1) + sign - 1
    if method != "closed":
        raise ValueError("method must be 'closed' or 'relation'")
    data = lam.at(2)
    alpha, ell, t = data.alpha_p, data.ell_p, data.t_p
    delta = lam.delta_lambda
    if ell == 0:
        return -1 + 0j
    lead = _geom(2 ** (n - 1 - s), ell) + delta * 2 ** ((n - 1 - s) * ell)
    short = ell - (1 if alpha == 2 * ell else 0)
    if n % 4 == 2:
        return lead + _msign((n - 2 * t) // 4) * 2 ** (
            (n / 2 - s) * (alpha - 1)
        ) * _geom(2 ** (s - 1), ell)
    if n % 4 == 0:
        third = (
            _msign(n // 4)
            * 2 ** (n / 2 - s)
            * _geom(2 ** (n - 1 - s), short)
            / _nonzero(1 - 2 ** (n / 2 - s))
        )
        fourth = -(
            _msign(n // 4)
            * 2 ** ((n / 2 - s) * (alpha - 2) + 1)
            * (1 - 2 ** (n / 2 - 1 - s))
            * _geom(2 ** (s - 1), short)
            / _nonzero(1 - 2 ** (n / 2 - s))
        )
        return lead + third + fourth
    sn = sign_n(n)
    if alpha % 2 == 1:
        first = (
            (1 + sn * 2 ** ((n + 1) / 2 - s))
            * (1 - sn * 2 ** ((n - 1) / 2 - s))
            * _geom(2 ** (n - 1 - s), ell)
            / _nonzero(1 - 2 ** (n - 2 * s))
        )
        second = -(
            sn
            * 2 ** ((n / 2 - s) * (alpha - 2) + 0.5)
            * (1 - 2 ** (n - 1 - 2 * s))
            * _geom(2 ** (s - 1), ell)
            / _nonzero(1 - 2 ** (n - 2 * s))
        )
        return first + second
    third = (
        sn
        * 2 ** ((n - 1) / 2 - s)
        * _geom(2 ** (n - 1 - s), short)
        / _nonzero(1 - 2 ** (n - 2 * s))
    )
    fourth = (
        2 ** ((n / 2 - s) * (alpha - 1) - n / 2 + 1)
        * _geom(2 ** (s - 1), ell)
        * (2 ** (n - 3 - s) * _b8(n - t) - _msign((n + t) // 2) * sn * 2 ** ((n - 3) // 2))
    )
    fifth = -(
        sn
        * 2 ** ((n / 2 - s) * (alpha - 1) - 0.5)
        * _geom(2 ** (s - 1), short)
        / _nonzero(1 - 2 ** (n - 2 * s))
    )
    return lead + third + fourth + fifth


# ---------------------------------------------------------------------------
# epsilon-factors
# ---------------------------------------------------------------------------


def eps_p_const(n: int, p: int, s: complex) -> complex:
    """Per-prime constant-term epsilon factor (p = 2 or an odd prime
    dividing the level)."""
    s = complex(s)
    if p == 2:
        if n % 4 == 0:
            num = 2 ** (s - n / 2 - 1) - (1 - _msign(n // 4)) / 2
            return num / _nonzero(1 - 2 ** (n / 2 - 1 - s))
        if n % 4 == 2:
            return 2 ** (s - n / 2)
        sn = sign_n(n)
        num = 2 ** (s - (n + 1) / 2) + sn
        return num / _nonzero(1 + sn * 2 ** ((n - 1) / 2 - s))
    if n % 2 == 0:
        c = _chi4pow(p, n // 2)
        num = (
            p ** (n - 1)
            - c * p ** (n / 2 - 1)
            + p ** (n - s)
            - p ** (2 * n - 1 - 2 * s)
        )
        return num / _nonzero(1 - c * p ** (n / 2 - 1 - s))
    c = _chi4pow(p, (n + 1) // 2)
    num = c * p ** ((n - 1) / 2) + p ** (n - 1) + p ** (n - s) - p ** (2 * n - 1 - 2 * s)
    return num / _nonzero(1 + c * p ** ((n - 1) / 2 - s))


def eps_const(n: int, d: int, s: complex) -> complex:
    """Constant-term epsilon factor for level ``d`` (odd squarefree):
    d^(s-n) times the product of the per-prime factors over p | 2d."""
    _check_modulus(d)
    s = complex(s)
    out = d ** (s - n) * eps_p_const(n, 2, s)
    for p, _ in factorize(d):
        out *= eps_p_const(n, p, s)
    return out


def _tau(p: int, e: int, c: complex, w: complex) -> complex:
    # twisted divisor sum over p^l, l = 0..e, with character value c at p
    return sum(c**l * p ** (w * l) for l in range(e + 1))


def eps_p_lambda(n: int, p: int, s: complex, lam: DualVector) -> complex:
    """Per-prime epsilon factor of a nonzero frequency vector at level one.

    The interior is always an exact finite polynomial in p^(-s) (for even n
    at an odd prime, a twisted divisor polynomial with no denominator at
    all), so the only poles are the genuine ones of the outer prefactor.
    """
    s = complex(s)
    if p == 2:
        zfac = _calZ2_poly(n, s, lam)
        if n % 4 == 0:
            return zfac / _nonzero(1 - 2 ** (n / 2 - 1 - s))
        if n % 4 == 2:
            return zfac
        chD = _chiD(discriminant(lam))(2)
        return (
            (1 - chD * 2 ** ((n - 1) / 2 - s)) * zfac / _nonzero(1 - 2 ** (n - 1 - 2 * s))
        )
    data = lam.at(p)
    if n % 2 == 0:
        c = _chi4pow(p, n // 2)
        total = 0j
        for j in range(data.ell_p + 1):
            total += p ** ((n - 1 - s) * j) * _tau(p, data.alpha_p - 2 * j, c, n / 2 - s)
        return total
    chD = _chiD(discriminant(lam))(p)
    pref = (1 - chD * p ** ((n - 1) / 2 - s)) / _nonzero(1 - p ** (n - 1 - 2 * s))
    return pref * Z_series(n, p, s, 1, lam)


def trivial_character() -> "Character":
    """The trivial character modulo 1."""
    return Character(q=1, values=(1 + 0j,))


def eps_lambda(
    n: int,
    d: int,
    s: complex,
    lam: DualVector,
    chi: "Character | None" = None,
) -> complex:
    """Epsilon factor of a nonzero frequency vector for level ``d`` (odd
    squarefree) and a Dirichlet character ``chi`` whose modulus divides d.

    For level one with the trivial character this is the finite product of
    :func:`eps_p_lambda` over the primes dividing 2 ||m||^2.  In general it
    is assembled from the normalized p = 2 factor, the character sum
    :func:`lightcone.expsums.S_sum`, the shifted tails at the primes
    dividing d, and the ramified local factors away from 2d, each divided
    by (or multiplied with) the matching linear Euler factor.

    The character-resolved assembly treats the unit scaling of the cofactor
    as if it varied with the running index of the composite series; in fact
    that scaling is constant (see :func:`Z_lambda_divisor_part`), so summing
    these values over all characters of a modulus that has a prime p >= 5
    not dividing ||m||^2 does not reproduce the composite series.  For
    composite-level evaluation use :func:`Z_lambda_composite`, which is
    cross-checked against the definitional sum; the character-resolved
    value agrees with it whenever each prime of the modulus divides
    ||m||^2 or equals 3 (a single unit square class).
    """
    _check_modulus(d)
    if lam is None:
        raise ValueError("eps_lambda requires a nonzero frequency vector")
    s = complex(s)
    if chi is None:
        chi = trivial_character()
    if d == 1 and chi.q == 1:
        out = eps_p_lambda(n, 2, s, lam)
        for p, _ in factorize(lam.norm2):
            if p != 2:
                out *= eps_p_lambda(n, p, s, lam)
        return out
    return _eps_lambda_general(n, d, s, lam, chi)


def _eps_lambda_general(
    n: int, d: int, s: complex, lam: DualVector, chi: "Character"
) -> complex:
    d1 = chi.q
    if d % d1 != 0:
        raise ValueError("character modulus must divide the level")
    sign = -1 if lam.m[0] % 2 else 1
    out = sign + 2 ** (1 - n) * Zt_series(n, 2, s, complex(chi(2)), lam)
    out *= complex(chi(2 * d // d1)).conjugate()
    if d1 > 1:
        out *= S_sum(d1, chi, lam.m)
    for p, _ in factorize(d // d1):
        out *= Zt_series(n, p, s, complex(chi(p)), lam)
    norm_primes = [p for p, _ in factorize(lam.norm2) if p != 2]
    d_primes = [p for p, _ in factorize(d)]
    if n % 2 == 0:
        shift = n / 2 - 1 - s
        for p in norm_primes:
            if p in d_primes:
                continue
            cval = complex(chi(p)) * _chi4pow(p, n // 2)
            out *= Z_series(n, p, s, complex(chi(p)), lam) / _nonzero(
                1 - cval * p**shift
            )
        for p in [2] + d_primes:
            if p == 2:
                # the quartic character occurring for n = 2 mod 4 kills p = 2
                cval = complex(chi(2)) if n % 4 == 0 else 0j
            else:
                cval = complex(chi(p)) * _chi4pow(p, n // 2)
            out /= _nonzero(1 - cval * p**shift)
        return out
    chiD = _chiD(discriminant(lam))
    for p in norm_primes:
        if p in d_primes:
            continue
        prodv = complex(chi(p)) * chiD(p)
        out *= (
            (1 - prodv * p ** ((n - 1) / 2 - s))
            * Z_series(n, p, s, complex(chi(p)), lam)
            / _nonzero(1 - complex(chi(p)) ** 2 * p ** (n - 1 - 2 * s))
        )
    for p in [2] + d_primes:
        prodv = complex(chi(p)) * chiD(p)
        out *= (1 - prodv * p ** ((n - 1) / 2 - s)) / _nonzero(
            1 - complex(chi(p)) ** 2 * p ** (n - 1 - 2 * s)
        )
    return out


def eps_functional_eq_residual(n: int, s: complex, lam: DualVector) -> complex:
    """Residual eps_n(n - s; m) - (predicted multiplier) * eps_n(s; m) of
    the level-one reflection identity (undefined for n = 0 mod 8, where no
    exact reflection identity holds)."""
    if n % 8 == 0:
        raise ValueError("no exact reflection identity in dimension 0 mod 8")
    s = complex(s)
    sn = sign_n(n)
    if n % 8 == 4:
        ratio = (
            2 ** (n - 2 * s)
            * (1 - 2 ** (n / 2 - 1 - s))
            / _nonzero(1 - 2 ** (s - 1 - n / 2))
        )
    elif n % 4 == 2:
        ratio = 2 ** (n / 2 - s)
    else:
        q = _chiD(discriminant(lam)).q
        ratio = (
            (1 + sn * 2 ** ((n - 1) / 2 - s))
            * 2 ** ((n + 1) / 2 - s)
            * q ** (n / 2 - s)
            / _nonzero(1 + sn * 2 ** ((n + 1) / 2 - s))
        )
    rhs = sn * ratio * lam.norm2 ** (s - n / 2)
    return eps_lambda(n, 1, n - s, lam) - rhs * eps_lambda(n, 1, s, lam)


# ---------------------------------------------------------------------------
# Composite-level Dirichlet series of a nonzero frequency vector
# ---------------------------------------------------------------------------


def _divisors_of(d: int) -> list[int]:
    out = [1]
    for p, e in factorize(d):
        out = [x * p**k for x in out for k in range(e + 1)]
    return sorted(out)


def Z_lambda_divisor_part(n: int, d: int, s: complex, lam: DualVector, kmax: int = 60) -> complex:
    """Finite part of the composite Dirichlet series of a nonzero frequency
    vector at level ``d`` (odd squarefree).

    Splitting each index by its gcd with 2d decomposes the series into the
    p = 2 bracket (shifted tail plus the parity sign times 2^(n-1)) times a
    sum over factorizations d = a * d1.  Each summand is the unit-scaled
    congruence sum at modulus d1 — argument (2a)^(-1) * m mod d1, a constant:
    the unit scaling of the cofactor does not depend on the running index —
    times the shifted tails at the primes dividing a.  Every factor here is
    an exact finite polynomial in the relevant p^(-s).
    """
    _check_modulus(d)
    if lam is None:
        raise ValueError("Z_lambda_divisor_part requires a nonzero frequency vector")
    s = complex(s)
    m = lam.m
    sign = -1 if m[0] % 2 else 1
    bracket = Zt_series(n, 2, s, 1, lam, kmax=kmax) + sign * 2 ** (n - 1)
    total = 0j
    for d1 in _divisors_of(d):
        a = d // d1
        if d1 == 1:
            vhat = 1 + 0j
        else:
            u = pow(2 * a, -1, d1)
            vhat = _varphi_composite(n, d1, tuple(u * x for x in m))
        if vhat == 0:
            continue
        prod = 1 + 0j
        for p, _ in factorize(a):
            prod *= Zt_series(n, p, s, 1, lam, kmax=kmax)
        total += vhat * prod
    return bracket * total


def unramified_local_model(n: int, p: int, s: complex, lam: DualVector) -> complex:
    """Closed local factor at an odd prime not dividing ``2 ||m||^2``.

    In even dimension this is the linear polynomial
    1 - chi_{-4}(p)^(n/2) p^(n/2-1-s); in odd dimension the rational form
    (1 - p^(n-1-2s)) / (1 - chi_D(p) p^((n-1)/2-s)) with chi_D the quadratic
    character attached to the discriminant of the frequency vector.
    """
    s = complex(s)
    if n % 2 == 0:
        return 1 - _chi4pow(p, n // 2) * p ** (n / 2 - 1 - s)
    chD = _chiD(discriminant(lam))(p)
    return (1 - p ** (n - 1 - 2 * s)) / _nonzero(1 - chD * p ** ((n - 1) / 2 - s))


def Z_lambda_composite(
    n: int, d: int, s: complex, lam: DualVector, pmax: int = 2000, kmax: int = 60
) -> complex:
    """Composite Dirichlet series of a nonzero frequency vector at level
    ``d``, evaluated in factored form.

    The value is :func:`Z_lambda_divisor_part` times the Euler product over
    primes coprime to 2d: the exact polynomial :func:`Z_series` at primes
    dividing ``||m||^2`` and the closed :func:`unramified_local_model` at the
    remaining odd primes up to ``pmax``.  The unramified truncation error is
    of order pmax^(n/2 - Re s), so this route is intended for Re s somewhat
    above n/2 + 1; the series converges absolutely for Re s > n.
    """
    _check_modulus(d)
    s = complex(s)
    out = Z_lambda_divisor_part(n, d, s, lam, kmax=kmax)
    ram = sorted(p for p, _ in factorize(lam.norm2) if p != 2 and d % p != 0)
    for p in ram:
        out *= Z_series(n, p, s, 1, lam, kmax=kmax)
    ram_set = set(ram)
    for p in _odd_primes_upto(pmax):
        if d % p == 0 or p in ram_set:
            continue
        out *= unramified_local_model(n, p, s, lam)
    return out


def Z_lambda_series(n: int, d: int, s: complex, lam: DualVector, tmax: int = 2000) -> complex:
    """Definitional composite Dirichlet series sum_t phi_{n,d}(t; lam) t^(-s),
    truncated at ``tmax``.  Converges absolutely for Re s > n (coefficients
    grow like t^(n-1)); the factored route :func:`Z_lambda_composite` is the
    cross-check."""
    _check_modulus(d)
    s = complex(s)
    return sum(phi_nd(n, d, t, lam) * t ** (-s) for t in range(1, tmax + 1))


@lru_cache(maxsize=8)
def _odd_primes_upto(bound: int) -> tuple[int, ...]:
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for q in range(2, int(bound**0.5) + 1):
        if sieve[q]:
            sieve[q * q :: q] = b"\x00" * len(sieve[q * q :: q])
    return tuple(q for q in range(3, bound + 1) if sieve[q])


# ---------------------------------------------------------------------------
# Dirichlet characters modulo odd squarefree q, as value tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """A Dirichlet character modulo ``q`` stored as a q-periodic value
    table (``values[k % q]`` is the value at k)."""

    q: int
    values: tuple[complex, ...]

    def __call__(self, k: int) -> complex:
        return self.values[k % self.q]

    @property
    def is_principal(self) -> bool:
        return all(
            v == 1 for k, v in enumerate(self.values) if math.gcd(k, self.q) == 1
        )


def _primitive_root(p: int) -> int:
    phi = p - 1
    prime_divs = [q for q, _ in factorize(phi)]
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in prime_divs):
            return g
    raise ValueError("no primitive root found")


def characters_mod(q: int) -> list[Character]:
    """All phi(q) Dirichlet characters modulo an odd squarefree ``q``,
    as value tables (the principal character comes first)."""
    _check_modulus(q)
    if q == 1:
        return [trivial_character()]
    specs = []
    for p, _ in factorize(q):
        g = _primitive_root(p)
        dlog = {}
        v = 1
        for e in range(p - 1):
            dlog[v] = e
            v = v * g % p
        specs.append((p, dlog))
    chars = []
    for js in _iproduct(*(range(p - 1) for p, _ in specs)):
        values: list[complex] = []
        for k in range(q):
            if math.gcd(k, q) != 1:
                values.append(0j)
                continue
            angle = 0.0
            for (p, dlog), j in zip(specs, js):
                angle += j * dlog[k % p] / (p - 1)
            values.append(cmath.exp(2j * math.pi * angle))
        chars.append(Character(q=q, values=tuple(values)))
    return chars

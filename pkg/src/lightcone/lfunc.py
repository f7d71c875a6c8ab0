"""Analytic special functions on complex arguments.

Gamma, Riemann and Hurwitz zeta, Dirichlet L-functions of real primitive
characters, their completed versions xi and L*, and the modified Bessel
function K_nu of complex order.  All routines are double precision with
documented accuracy regions; outside those regions they still return a value
but emit an AccuracyWarning.
"""

from __future__ import annotations

import cmath
import math
import warnings
from fractions import Fraction
from functools import lru_cache

from .arith import CharSpec, char_from_D


class AccuracyWarning(UserWarning):
    """Signals evaluation outside the documented accuracy region."""


def _finite(z: complex) -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ArithmeticError("non-finite result")
    return z


# ---------------------------------------------------------------------------
# Gamma: Lanczos approximation (g = 607/128, 15 terms) plus reflection.

_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)


def _gamma_core(s: complex) -> complex:
    # valid for Re(s) >= 0.5
    acc = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        acc += _LANCZOS_C[i] / (s - 1 + i)
    t = s - 0.5 + _LANCZOS_G
    return math.sqrt(2 * math.pi) * t ** (s - 0.5) * cmath.exp(-t) * acc


def gamma(s: complex) -> complex:
    """Gamma function; raises at the poles s = 0, -1, -2, ..."""
    s = complex(s)
    if s.imag == 0 and s.real <= 0 and s.real == int(s.real):
        raise ValueError("gamma pole")
    if s.real < 0.5:
        return _finite(math.pi / (cmath.sin(math.pi * s) * _gamma_core(1 - s)))
    return _finite(_gamma_core(s))


def rgamma(s: complex) -> complex:
    """Reciprocal gamma, entire: returns exactly 0 at the poles of gamma."""
    s = complex(s)
    if s.imag == 0 and s.real <= 0 and s.real == int(s.real):
        return 0j
    return _finite(1 / gamma(s))


# ---------------------------------------------------------------------------
# Riemann and Hurwitz zeta: Euler-Maclaurin with Bernoulli tail corrections.

_BERNOULLI = (
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330), Fraction(854513, 138),
    Fraction(-236364091, 2730), Fraction(8553103, 6),
    Fraction(-23749461029, 870), Fraction(8615841276005, 14322),
)
# B_{2j} / (2j)! as floats, j = 1..15
_BERN_FACT = tuple(float(b / math.factorial(2 * j)) for j, b in enumerate(_BERNOULLI, start=1))


def _euler_maclaurin(s: complex, a: float) -> complex:
    """Hurwitz zeta(s, a) for Re(s) > -2.5 or so, 0 < a <= 1."""
    N = max(20, math.ceil(2 * abs(s.imag)))
    total = 0j
    for k in range(N):
        total += (k + a) ** -s
    M = N + a
    total += M ** (1 - s) / (s - 1) + 0.5 * M ** -s
    poch = s
    for j, coeff in enumerate(_BERN_FACT, start=1):
        total += coeff * poch * M ** (-s - 2 * j + 1)
        poch *= (s + 2 * j - 1) * (s + 2 * j)
    return total


def _warn_region(s: complex) -> None:
    if abs(s.imag) > 100:
        warnings.warn("zeta accuracy not guaranteed for |Im s| > 100", AccuracyWarning)


@lru_cache(maxsize=1 << 15)
def _zeta_cached(s: complex) -> complex:
    if s.real < -2:
        # reflection keeps the Euler-Maclaurin cancellation bounded
        return (
            2 ** s
            * math.pi ** (s - 1)
            * cmath.sin(math.pi * s / 2)
            * gamma(1 - s)
            * _zeta_cached(1 - s)
        )
    return _euler_maclaurin(s, 1.0)


def zeta(s: complex) -> complex:
    """Riemann zeta with analytic continuation; raises at s = 1."""
    s = complex(s)
    if s == 1:
        raise ValueError("zeta pole")
    _warn_region(s)
    return _finite(_zeta_cached(s))


@lru_cache(maxsize=1 << 17)
def _hurwitz_cached(s: complex, a: float) -> complex:
    return _euler_maclaurin(s, a)


def hurwitz(s: complex, a: float) -> complex:
    """Hurwitz zeta(s, a) for 0 < a <= 1 and Re(s) > -2.5; raises at s = 1."""
    s = complex(s)
    if not 0 < a <= 1:
        raise ValueError("hurwitz requires 0 < a <= 1")
    if s == 1:
        raise ValueError("zeta pole")
    if s.real < -2.5:
        warnings.warn("hurwitz accuracy not guaranteed for Re s < -2.5", AccuracyWarning)
    _warn_region(s)
    return _finite(_hurwitz_cached(s, a))


# ---------------------------------------------------------------------------
# Dirichlet L-functions of real primitive characters.

_char_cached = lru_cache(maxsize=1024)(char_from_D)


def _table_L(s: complex, values: tuple[complex, ...]) -> complex:
    """Continuation of sum values[k mod q] k^{-s} for a q-periodic table."""
    q = len(values)
    if s == 1:
        # the 1/(s-1) parts of the Hurwitz terms cancel exactly for a
        # mean-zero table, leaving -sum values[r] psi(r/q) / q
        if abs(sum(values) / q) > 1e-15:
            raise ValueError("zeta pole")
        total = 0j
        for r in range(1, q + 1):
            v = values[r % q]
            if v != 0:
                total -= v * _digamma(r / q)
        return total / q
    total = 0j
    for r in range(1, q + 1):
        v = values[r % q]
        if v != 0:
            total += v * _hurwitz_cached(s, r / q)
    return q ** -s * total


@lru_cache(maxsize=1 << 15)
def _L_cached(s: complex, D: int) -> complex:
    chi = _char_cached(D)
    if chi.q == 1:
        return _zeta_cached(s)
    if s.real >= -2:
        return _table_L(s, tuple(complex(v) for v in chi.values))
    # reflection via the completed functional equation; rgamma plants the
    # trivial zeros exactly
    a = chi.parity_a
    return (
        (chi.q / math.pi) ** ((1 - 2 * s) / 2)
        * gamma((1 - s + a) / 2)
        * rgamma((s + a) / 2)
        * _L_cached(1 - s, D)
    )


def dirichlet_L(s: complex, chi: CharSpec) -> complex:
    """L(s, chi) for a primitive real character, continued via Hurwitz zeta."""
    s = complex(s)
    if chi.q == 1 and s == 1:
        raise ValueError("zeta pole")
    _warn_region(s)
    return _finite(_L_cached(s, chi.D))


def dirichlet_series_table(s: complex, values: tuple[complex, ...]) -> complex:
    """Continuation of sum values[k mod q] k^{-s} for any q-periodic table.

    Used for products of characters that need not be real or primitive.
    Valid for Re(s) > -2 (Hurwitz decomposition); a pole at s = 1 surfaces
    unless the table has mean zero.
    """
    s = complex(s)
    if len(values) == 0:
        raise ValueError("empty coefficient table")
    _warn_region(s)
    return _finite(_table_L(s, values))


def _digamma(a: float) -> float:
    # digamma by recursion plus asymptotic series; used only on (0, 1]
    acc = 0.0
    while a < 12:
        acc -= 1 / a
        a += 1
    inv2 = 1 / (a * a)
    series = math.log(a) - 0.5 / a
    # asymptotic tail: -sum B_{2j} / (2j a^{2j})
    pw = inv2
    for j, b in enumerate(_BERNOULLI[:7], start=1):
        series -= float(b) / (2 * j) * pw
        pw *= inv2
    return acc + series


# ---------------------------------------------------------------------------
# Completed functions.

def xi(s: complex) -> complex:
    """Completed zeta: pi^(-s/2) Gamma(s/2) zeta(s).

    Simple poles at s = 0 and s = 1; at exact trivial zeros of zeta the
    component gamma pole propagates as an error.
    """
    s = complex(s)
    return _finite(math.pi ** (-s / 2) * gamma(s / 2) * zeta(s))


def Lstar(s: complex, chi: CharSpec) -> complex:
    """Completed L-function (q/pi)^((s+a)/2) Gamma((s+a)/2) L(s, chi)."""
    s = complex(s)
    a = chi.parity_a
    return _finite(
        (chi.q / math.pi) ** ((s + a) / 2) * gamma((s + a) / 2) * dirichlet_L(s, chi)
    )


# ---------------------------------------------------------------------------
# Modified Bessel function of the second kind, complex order.

def _bessel_quad(nu: complex, x: float, h: float, T: float) -> complex:
    n = int(T / h) + 1
    total = 0.5 * cmath.exp(-x)  # t = 0 endpoint, cosh(0) = 1
    for k in range(1, n + 1):
        t = k * h
        total += cmath.exp(-x * math.cosh(t)) * cmath.cosh(nu * t)
    return total * h


@lru_cache(maxsize=1 << 16)
def _bessel_cached(nu: complex, x: float) -> complex:
    T = 1.0
    a = abs(nu.real)
    while x * (math.cosh(T) - 1) - a * T < 55:
        T *= 1.25
    h = 0.25 / (1 + abs(nu.imag) / 6)
    prev = _bessel_quad(nu, x, h, T)
    for _ in range(12):
        h /= 2
        cur = _bessel_quad(nu, x, h, T)
        if abs(cur - prev) <= 1e-11 * max(abs(cur), 1e-300):
            return cur
        prev = cur
    warnings.warn("bessel_K quadrature did not reach 1e-11 agreement", AccuracyWarning)
    return cur


def bessel_K(nu: complex, x: float) -> complex:
    """K_nu(x) for x > 0 via the integral of exp(-x cosh t) cosh(nu t).

    Symmetric in nu <-> -nu; accuracy documented for x >= 0.05 and
    |Im nu| <= 200.
    """
    if x <= 0:
        raise ValueError("bessel_K requires x > 0")
    nu = complex(nu)
    if nu.real < 0 or (nu.real == 0 and nu.imag < 0):
        nu = -nu
    if x < 0.05 or abs(nu.imag) > 200:
        warnings.warn("bessel_K outside documented accuracy region", AccuracyWarning)
    out = _finite(_bessel_cached(nu, x))
    # quadrature error is absolute at the scale of the t = 0 integrand, so a
    # result far below that scale has lost relative accuracy to cancellation
    if abs(out) < 1e-12 * math.exp(-x):
        warnings.warn("bessel_K relative accuracy lost to cancellation", AccuracyWarning)
    return out

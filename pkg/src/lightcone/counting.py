"""Counting rational points on spheres by height: sharp-cutoff counts,
Mellin-smoothed counts, and comparison against the series main term.

A primitive integer row (p, q) with ||p|| = d q corresponds to a rational
point p / (d q) on the unit sphere; at the identity its invariant height
||v|| / ||e0|| is exactly q, so counting by height up to T means summing
shell sizes over integers q <= T.  Shell sizes are obtained arithmetically:
the number of all rows at height q is the sum-of-(n+1)-squares count
r_{n+1}(d^2 q^2) and the primitive count follows by Moebius inversion over
the common divisor of (p, q).  The main term is omega * T^n / n, with
omega the residue of the series at s = n.

Smoothed variant: N_h(T) = sum of h(q / T) against a fixed C-infinity bump
family h; its transform hhat(s) = integral of h(y) y^{-s-1} dy links the
smoothed count to the series by N_hat(s) = hhat(-s) E(s, .), which is
cross-checked numerically on a T-grid.

Enumeration work is shell-parallel in principle (each height q is an
independent task with a deterministic merge); this implementation runs the
shells in one process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .arith import BudgetError, factorize
from .eisenstein import FormParams, _cone_points, _r_square_values, omega

__all__ = [
    "Bump",
    "CountResult",
    "enumerate_points",
    "count_sharp",
    "count_smoothed",
    "mellin",
    "mellin_counting_residual",
    "secondary_term_slopes",
]

_POINT_BUDGET = 4.0e7


@dataclass(frozen=True)
class CountResult:
    """Sharp count at height T with its predicted main term."""

    T: float
    count: int
    main_term: float
    relative_error: float


@dataclass(frozen=True)
class Bump:
    """The fixed smooth cutoff family: h(y) = amplitude * exp(-1/(1-u^2))
    with u = (2 ln y - ln(ab)) / ln(b/a) on the support (a, b), identically
    zero outside.  All derivatives vanish at the endpoints."""

    a: float = 0.5
    b: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.a < self.b:
            raise ValueError("bump support requires 0 < a < b")

    def __call__(self, y: float) -> float:
        if y <= self.a or y >= self.b:
            return 0.0
        u = (2.0 * math.log(y) - math.log(self.a * self.b)) / math.log(self.b / self.a)
        if abs(u) >= 1.0:
            return 0.0
        return self.amplitude * math.exp(-1.0 / (1.0 - u * u))

    def values(self, y: np.ndarray) -> np.ndarray:
        """Vectorized evaluation (zero outside the support)."""
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros_like(y)
        inside = (y > self.a) & (y < self.b)
        u = (2.0 * np.log(y[inside]) - math.log(self.a * self.b)) / math.log(
            self.b / self.a
        )
        good = np.abs(u) < 1.0
        vals = np.zeros_like(u)
        vals[good] = self.amplitude * np.exp(-1.0 / (1.0 - u[good] ** 2))
        out[inside] = vals
        return out


def mellin(h: Bump, s) -> complex:
    """Transform hhat(s) = integral over the support of h(y) y^{-s-1} dy,
    by adaptive quadrature to ~1e-10 relative."""
    if not isinstance(h, Bump):
        raise ValueError("unsupported cutoff family: expected a Bump")
    s = complex(s)

    def re_part(y: float) -> float:
        return (h(y) * y ** (-s - 1)).real

    def im_part(y: float) -> float:
        return (h(y) * y ** (-s - 1)).imag

    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    re_val, _ = quad(re_part, h.a, h.b, **kw)
    im_val, _ = quad(im_part, h.a, h.b, **kw)
    return complex(re_val, im_val)


# ---------------------------------------------------------------------------
# shell sizes
# ---------------------------------------------------------------------------


def _mu(m: int) -> int:
    out = 1
    for _, e in factorize(m):
        if e > 1:
            return 0
        out = -out
    return out


def _primitive_shell_counts(params: FormParams, qmax: int) -> np.ndarray:
    """Array P[0..qmax] with P[q] = number of primitive rows (p, q),
    ||p|| = d q, from r_{n+1}(d^2 q^2) by Moebius inversion."""
    n, d = params.n, params.d
    if n + 1 > 8:
        raise BudgetError("shell counts available for n + 1 <= 8 squares")
    cap = 6000 if n + 1 <= 4 else 2500
    if d * qmax > cap:
        raise BudgetError(
            f"shell-count budget exceeded: table bound {d * qmax} > {cap}"
        )
    full = _r_square_values(n + 1, d * qmax)
    raw = full[d * np.arange(qmax + 1)]
    P = np.zeros(qmax + 1)
    for q in range(1, qmax + 1):
        acc = 0.0
        c = 1
        # divisors of q
        divs = [1]
        for p, e in factorize(q):
            divs = [x * p ** k for x in divs for k in range(e + 1)]
        for c in divs:
            mu = _mu(c)
            if mu:
                acc += mu * raw[q // c]
        P[q] = acc
    return P


def enumerate_points(params: FormParams, T: float) -> list[tuple[tuple[int, ...], int]]:
    """All primitive rows (p, q) with ||p|| = d q and 1 <= q <= T, each
    exactly once, as (p-tuple, q) pairs."""
    qmax = int(math.floor(T))
    if qmax < 1:
        return []
    est = omega(params) * float(T) ** params.n / params.n
    if est > _POINT_BUDGET:
        raise BudgetError(
            f"enumeration budget exceeded: ~{est:.2e} points at T = {T}"
        )
    rows = _cone_points(params, qmax)
    return [(tuple(int(v) for v in row[:-1]), int(row[-1])) for row in rows]


def count_sharp(params: FormParams, T: float) -> CountResult:
    """Sharp-cutoff count of primitive rows of height at most T, with the
    main term omega * T^n / n.  Heights are integers, so the count is
    constant on [q, q+1) and count(T) = count(T + 1/2) at integer T."""
    T = float(T)
    qmax = int(math.floor(T))
    if qmax < 1:
        main = omega(params) * T ** params.n / params.n
        rel = (0.0 - main) / main if main else 0.0
        return CountResult(T, 0, main, rel)
    P = _primitive_shell_counts(params, qmax)
    count = int(round(float(P[1:].sum())))
    main = omega(params) * T ** params.n / params.n
    return CountResult(T, count, main, (count - main) / main)


def count_smoothed(params: FormParams, h: Bump, T: float) -> tuple[float, float]:
    """Smoothed count N_h(T) = sum over primitive rows of h(q / T), paired
    with its main term omega * hhat(-n) * T^n."""
    if not isinstance(h, Bump):
        raise ValueError("unsupported cutoff family: expected a Bump")
    T = float(T)
    main = omega(params) * mellin(h, -params.n).real * T ** params.n
    qmax = int(math.ceil(h.b * T))
    if qmax < 1 or h.b * T <= 1.0:
        return 0.0, main
    P = _primitive_shell_counts(params, qmax)
    qs = np.arange(qmax + 1)
    hv = h.values(qs / T)
    return float(np.dot(P, hv)), main


def mellin_counting_residual(params: FormParams, h: Bump, s,
                             t_max: float = 2000.0, grid: int = 3000) -> float:
    """Relative residual of the transform identity N_hat(s) = hhat(-s) *
    E(s, z0): the left side is computed by numerically transforming the
    smoothed count over a logarithmic T-grid, the right side from the shell
    Dirichlet series.  Requires Re s > n."""
    n = params.n
    s = complex(s)
    if s.real <= n:
        raise ValueError("transform comparison requires Re s > n")
    qmax = int(math.ceil(h.b * t_max))
    P = _primitive_shell_counts(params, qmax)
    # right side: hhat(-s) * sum P(q) q^{-s} (the series converges; the
    # discarded tail is below the quadrature error for Re s > n + 1)
    qs = np.arange(1, qmax + 1, dtype=np.float64)
    series = complex(np.sum(P[1:] * np.exp(-s * np.log(qs))))
    rhs = mellin(h, -s) * series
    # left side: trapezoid of N_h(T) T^{-s-1} dT on a log grid
    t0 = 1.0 / h.b
    ts = np.exp(np.linspace(math.log(t0), math.log(t_max), grid))
    qs = np.arange(1, qmax + 1, dtype=np.float64)
    # N_h on the grid: rows are grid points, columns shells
    ratio = qs[None, :] / ts[:, None]
    nh = h.values(ratio) @ P[1:]
    integ = nh * np.exp((-s - 1) * np.log(ts))
    # trapezoid in log-space: dT = T dlog
    lhs = complex(np.trapezoid(integ * ts, np.log(ts)))
    return abs(lhs - rhs) / (abs(rhs) + 1e-300)


def secondary_term_slopes(h: Bump | None = None,
                          dims: Sequence[int] = (2, 3, 4, 5, 6, 7),
                          t_grid: Sequence[float] = (100, 140, 200, 280, 400, 560, 800),
                          ) -> list[tuple[int, float, float, bool]]:
    """Least-squares slope of log |N_h - main| against log T per dimension,
    with the generous threshold n/2 + 0.3 and a flag when it is exceeded.
    A diagnostic, not a sharp verification of any asymptotic exponent."""
    h = h or Bump()
    out = []
    for n in dims:
        params = FormParams(n, 1)
        xs, ys = [], []
        for T in t_grid:
            value, main = count_smoothed(params, h, float(T))
            err = abs(value - main)
            if err == 0:
                continue
            xs.append(math.log(T))
            ys.append(math.log(err))
        if len(xs) < 2:
            out.append((n, float("nan"), n / 2 + 0.3, False))
            continue
        slope = float(np.polyfit(xs, ys, 1)[0])
        thresh = n / 2 + 0.3
        out.append((n, slope, thresh, slope > thresh))
    return out

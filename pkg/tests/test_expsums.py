"""Tests for the quadratic exponential sums: brute oracles vs closed forms."""

import cmath
import itertools
import math
from dataclasses import dataclass

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lightcone.arith import BudgetError, char_from_D, factorize
from lightcone.expsums import (
    DualVector,
    F_brute,
    F_closed,
    S_sum,
    _congruence_sum,
    dual_vector,
    phi_brute,
    phi_nd,
    phi_prime_power,
    varphi_brute,
    varphi_closed_prime,
)


def literal_congruence_sum(n, N, m, c):
    """Direct enumeration of the defining sum, term by term."""
    total = 0j
    for h in itertools.product(range(N), repeat=n):
        if (sum(x * x for x in h) + c) % N == 0:
            total += cmath.exp(2j * cmath.pi * (sum(a * b for a, b in zip(m, h)) % N) / N)
    return total


def m_grid(n):
    """Nonzero test vectors of length n with varied 2-adic and odd structure."""
    out = [(0,) * n, (1,) + (0,) * (n - 1), (2,) + (0,) * (n - 1), (1,) * n,
           (4,) + (0,) * (n - 1), (2,) * n, (3,) + (0,) * (n - 1)]
    if n >= 2:
        out += [(2, 2) + (0,) * (n - 2), (6, 2) + (0,) * (n - 2), (4, 2) + (0,) * (n - 2)]
    return sorted(set(out))


@dataclass(frozen=True)
class TableChar:
    """A Dirichlet character given by its full value table."""

    q: int
    table: tuple

    def __call__(self, t):
        return self.table[t % self.q]


def _primitive_root(p):
    for g in range(2, p):
        seen = {pow(g, j, p) for j in range(p - 1)}
        if len(seen) == p - 1:
            return g
    raise ValueError(f"no primitive root mod {p}")


def all_characters(q):
    """Every Dirichlet character modulo an odd squarefree q, as value tables."""
    if q == 1:
        return [TableChar(1, (1 + 0j,))]
    primes = [p for p, _ in factorize(q)]
    per_prime = []
    for p in primes:
        g = _primitive_root(p)
        index = {pow(g, j, p): j for j in range(p - 1)}
        tables = []
        for k in range(p - 1):
            tab = [0j] * p
            for t in range(1, p):
                tab[t] = cmath.exp(2j * cmath.pi * k * index[t] / (p - 1))
            tables.append(tab)
        per_prime.append((p, tables))
    chars = []
    for combo in itertools.product(*[range(p - 1) for p, _ in per_prime]):
        tab = [0j] * q
        for t in range(q):
            if math.gcd(t, q) == 1:
                val = 1 + 0j
                for (p, tables), k in zip(per_prime, combo):
                    val *= tables[k][t % p]
                tab[t] = val
        chars.append(TableChar(q, tuple(tab)))
    return chars


def is_principal(chi):
    return all(abs(chi(t) - 1) < 1e-12 for t in range(1, chi.q + 1) if math.gcd(t, chi.q) == 1)


def induced_char(base, q):
    """Restrict a character to the units modulo a multiple q of its modulus."""
    tab = tuple(complex(base(t)) if math.gcd(t, q) == 1 else 0j for t in range(q))
    return TableChar(q, tab)


class TestCongruenceOracle:
    def test_matches_literal_enumeration(self):
        cases = [(1, 4, (0,), 0), (2, 3, (0, 0), 0), (2, 5, (0, 0), 1),
                 (2, 6, (2, 2), 9), (3, 8, (1, 1, 1), 1), (2, 12, (4, 2), 4),
                 (1, 9, (3,), 1), (3, 6, (0, 2, 4), 25), (2, 7, (1, 3), 2)]
        for n, N, m, c in cases:
            fast = _congruence_sum(n, N, m, c)
            slow = literal_congruence_sum(n, N, m, c)
            assert abs(fast - slow) < 1e-10, (n, N, m, c)

    def test_budget_guard(self):
        with pytest.raises(BudgetError):
            phi_brute(5, 100, (0,) * 5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            phi_brute(2, 3, (1, 2, 3))


class TestPhiVarphiValues:
    def test_phi_small(self):
        assert abs(phi_brute(2, 3, (0, 0)) - 1) < 1e-10
        assert abs(phi_brute(1, 4, (0,)) - 2) < 1e-10

    def test_phi_at_two(self):
        for n in range(1, 5):
            for m in [(0,) * n, (2,) * n, (4,) + (2,) * (n - 1)]:
                assert abs(phi_brute(n, 2, m) - 2 ** (n - 1)) < 1e-10

    def test_varphi_small(self):
        assert abs(varphi_brute(2, 5, (0, 0)) - 4) < 1e-10

    def test_varphi_at_two(self):
        for n in range(1, 5):
            for m in [(0,) * n, (1,) * n, (2,) * n, (3,) + (1,) * (n - 1)]:
                expect = (-1) ** (m[0] % 2) * 2 ** (n - 1)
                assert abs(varphi_brute(n, 2, m) - expect) < 1e-10

    def test_varphi_trivial_modulus(self):
        assert varphi_brute(2, 1, (7, 3)) == 1

    def test_phi_multiplicative(self):
        pairs = [(3, 5), (2, 9), (4, 5), (3, 8), (5, 6), (2, 15), (4, 7)]
        for n in (1, 2, 3):
            for m in [(0,) * n, (1,) + (0,) * (n - 1), (2,) * n]:
                for t1, t2 in pairs:
                    whole = phi_brute(n, t1 * t2, m)
                    split = phi_brute(n, t1, m) * phi_brute(n, t2, m)
                    assert abs(whole - split) < 1e-9, (n, m, t1, t2)

    def test_varphi_twisted_multiplicative(self):
        pairs = [(3, 5), (2, 9), (4, 5), (3, 7), (2, 7), (3, 4)]
        for n in (1, 2, 3):
            for m in [(0,) * n, (1,) + (0,) * (n - 1), (1,) * n, (2,) * n]:
                for t1, t2 in pairs:
                    whole = varphi_brute(n, t1 * t2, m)
                    c2 = pow(t2, -1, t1)
                    c1 = pow(t1, -1, t2)
                    split = (varphi_brute(n, t1, tuple(c2 * x for x in m))
                             * varphi_brute(n, t2, tuple(c1 * x for x in m)))
                    assert abs(whole - split) < 1e-9, (n, m, t1, t2)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 3), st.integers(1, 12), st.integers(1, 12),
           st.lists(st.integers(-4, 4), min_size=3, max_size=3))
    def test_phi_multiplicative_property(self, n, t1, t2, mseed):
        if math.gcd(t1, t2) != 1:
            return
        m = tuple(mseed[:n])
        whole = phi_brute(n, t1 * t2, m)
        split = phi_brute(n, t1, m) * phi_brute(n, t2, m)
        assert abs(whole - split) < 1e-9


class TestVarphiClosedPrime:
    def test_values(self):
        assert abs(varphi_closed_prime(2, 5, (0, 0)) - 4) < 1e-10
        assert abs(varphi_closed_prime(3, 3, (0, 0, 0)) - 12) < 1e-10

    def test_single_variable(self):
        got = varphi_closed_prime(1, 3, (1,))
        assert abs(got - varphi_brute(1, 3, (1,))) < 1e-10

    def test_requires_odd_prime(self):
        with pytest.raises(ValueError):
            varphi_closed_prime(2, 2, (0, 0))

    def test_matches_brute(self):
        for p in (3, 5, 7, 11):
            for n in range(1, 5):
                for m in m_grid(n):
                    a = varphi_closed_prime(n, p, m)
                    b = varphi_brute(n, p, m)
                    assert abs(a - b) < 1e-10, (n, p, m)


class TestFSums:
    def test_diagonal(self):
        for n, p, k in [(1, 2, 3), (2, 3, 2), (3, 5, 1), (2, 2, 4)]:
            assert abs(F_brute(n, p, k, k, (0,) * n) - p ** ((n - 1) * k)) < 1e-9
            assert abs(F_closed(n, p, k, k, (0,) * n) - p ** ((n - 1) * k)) < 1e-9

    def test_example(self):
        assert abs(F_brute(2, 3, 1, 0, (0, 0)) + 2) < 1e-10
        assert abs(F_closed(2, 3, 1, 0, (0, 0)) + 2) < 1e-10

    def test_vanishing_above_ell(self):
        # i greater than the p-valuation of gcd(m) kills the sum
        cases = [(2, 3, 2, 2, (1, 0)), (2, 2, 2, 1, (1, 1)), (1, 5, 3, 2, (5,))]
        for n, p, k, i, m in cases:
            assert abs(F_brute(n, p, k, i, m)) < 1e-9
            assert F_closed(n, p, k, i, m) == 0

    def test_two_adic_step(self):
        # at p=2, i = ell, k = ell + 1: full mass iff all entries of m/2^ell odd
        assert abs(F_closed(3, 2, 1, 0, (1, 1, 1)) - 2 ** 2) < 1e-10
        assert abs(F_brute(3, 2, 1, 0, (1, 1, 1)) - 2 ** 2) < 1e-10
        assert abs(F_closed(2, 2, 2, 1, (2, 2)) - 2 ** 2) < 1e-10
        assert abs(F_brute(2, 2, 2, 1, (2, 2)) - 2 ** 2) < 1e-10
        assert F_closed(2, 2, 2, 1, (2, 4)) == 0
        assert abs(F_brute(2, 2, 2, 1, (2, 4))) < 1e-10

    def test_tail_vanishing(self):
        # k >= alpha - i + 2 vanishes at p = 2
        m = (1, 1)  # alpha = 1
        for k in range(3, 6):
            assert F_closed(2, 2, k, 0, m) == 0
            assert abs(F_brute(2, 2, k, 0, m)) < 1e-9

    def test_odd_dimension_odd_step(self):
        # n odd and k - i odd: zero except at k = alpha - i + 1
        m = (3, 0, 0)  # alpha = 2
        for k, i in [(1, 0), (5, 0), (4, 1)]:
            assert F_closed(3, 3, k, i, m) == 0
        got = F_closed(3, 3, 3, 0, m)
        assert abs(got - F_brute(3, 3, 3, 0, m)) < 1e-9
        assert abs(got) > 0

    def test_grid_against_brute(self):
        worst = 0.0
        for p in (2, 3, 5, 7):
            for n in range(1, 7):
                for m in m_grid(n):
                    for k in range(0, 7 if p == 2 else 5):
                        for i in range(k + 1):
                            try:
                                ref = F_brute(n, p, k, i, m)
                            except BudgetError:
                                continue
                            got = F_closed(n, p, k, i, m)
                            scale = max(1.0, abs(ref))
                            worst = max(worst, abs(ref - got) / scale)
                            assert abs(ref - got) <= 1e-10 * scale, (n, p, k, i, m)
        assert worst < 1e-10


class TestPhiPrimePower:
    def test_examples(self):
        assert abs(phi_prime_power(2, 3, 1, (0, 0)) - 1) < 1e-10
        assert phi_prime_power(4, 7, 0, (0, 0, 0, 0)) == 1
        assert abs(phi_prime_power(2, 2, 1, (0, 0)) - 2) < 1e-10

    def test_matches_brute(self):
        for p in (2, 3, 5):
            for n in range(1, 5):
                for m in m_grid(n):
                    for k in range(0, 5 if p == 2 else 4):
                        try:
                            ref = phi_brute(n, p ** k, m)
                        except BudgetError:
                            continue
                        got = phi_prime_power(n, p, k, m)
                        scale = max(1.0, abs(ref))
                        assert abs(ref - got) <= 1e-9 * scale, (n, p, k, m)

    def test_vanishing_tail(self):
        # for m != 0, phi_n(p^k; m) dies once k exceeds alpha_p + 1
        cases = [(2, 3, (3, 0)), (1, 2, (2,)), (2, 5, (5, 5)), (3, 2, (2, 0, 0))]
        for n, p, m in cases:
            norm2 = sum(x * x for x in m)
            alpha = 0
            while norm2 % p ** (alpha + 1) == 0:
                alpha += 1
            for k in range(alpha + 2, alpha + 4):
                assert abs(phi_prime_power(n, p, k, m)) < 1e-9, (n, p, m, k)
                try:
                    assert abs(phi_brute(n, p ** k, m)) < 1e-9, (n, p, m, k)
                except BudgetError:
                    pass


class TestDualVector:
    def test_rejects_zero_and_mixed_parity(self):
        with pytest.raises(ValueError):
            dual_vector((0, 0))
        with pytest.raises(ValueError):
            dual_vector((1, 2))
        with pytest.raises(ValueError):
            dual_vector(())

    def test_fields(self):
        v = dual_vector((2, 4))
        assert v.n == 2 and v.norm2 == 20
        two = v.at(2)
        assert (two.alpha_p, two.ell_p, two.t_p) == (2, 1, 5)
        five = v.at(5)
        assert (five.alpha_p, five.ell_p, five.t_p) == (1, 0, 4)
        assert v.delta_lambda == 0
        assert v.at(7).alpha_p == 0

    def test_delta_flag(self):
        assert dual_vector((1, 1)).delta_lambda == 1
        assert dual_vector((2, 2)).delta_lambda == 1
        assert dual_vector((2, 4)).delta_lambda == 0
        assert dual_vector((6, 2)).delta_lambda == 1

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 4), st.lists(st.integers(-6, 6), min_size=4, max_size=4),
           st.booleans())
    def test_invariants(self, n, seed, odd):
        m = tuple(2 * x + (1 if odd else 0) for x in seed[:n])
        if all(x == 0 for x in m):
            return
        v = dual_vector(m)
        for data in v.padic:
            assert data.alpha_p >= 2 * data.ell_p
        if n % 2 == 1:
            D = (-1) ** ((n - 1) // 2) * v.norm2
            assert D % 4 != 3


class TestPhiNd:
    def test_t_one(self):
        for n in range(1, 5):
            lam = dual_vector((2,) + (0,) * (n - 1))
            got = phi_nd(n, 1, 1, lam)
            assert abs(got - 2 ** (n - 1)) < 1e-10

    def test_example_d1(self):
        assert abs(phi_nd(2, 1, 3, None) - 2) < 1e-10
        assert abs(phi_nd(2, 1, 3, None, method="brute") - 2) < 1e-10

    def test_example_d3(self):
        closed = phi_nd(2, 3, 1, None)
        brute = phi_nd(2, 3, 1, None, method="brute")
        assert abs(closed - brute) < 1e-9
        assert abs(brute - varphi_brute(2, 6, (0, 0))) < 1e-9

    def test_rejects_bad_d(self):
        with pytest.raises(ValueError):
            phi_nd(2, 2, 1, None)
        with pytest.raises(ValueError):
            phi_nd(2, 9, 1, None)
        with pytest.raises(ValueError):
            phi_nd(2, 3, 1, None, method="magic")

    def test_closed_matches_brute(self):
        lams = {1: [None, dual_vector((1,)), dual_vector((2,)), dual_vector((4,))],
                2: [None, dual_vector((1, 1)), dual_vector((2, 0)), dual_vector((3, 1)),
                    dual_vector((2, 4))],
                3: [None, dual_vector((1, 1, 1)), dual_vector((2, 0, 0))]}
        for n, choices in lams.items():
            for d in (1, 3, 5, 15):
                for t in range(1, 7):
                    for lam in choices:
                        try:
                            ref = phi_nd(n, d, t, lam, method="brute")
                        except BudgetError:
                            continue
                        got = phi_nd(n, d, t, lam)
                        scale = max(1.0, abs(ref))
                        assert abs(ref - got) <= 1e-9 * scale, (n, d, t, lam)


class TestSSum:
    def test_trivial_modulus(self):
        chi = all_characters(1)[0]
        assert abs(S_sum(1, chi, (1, 2)) - 1) < 1e-12

    def test_modulus_mismatch(self):
        chi = all_characters(3)[0]
        with pytest.raises(ValueError):
            S_sum(5, chi, (1, 1))
        with pytest.raises(ValueError):
            S_sum(4, TableChar(4, (0j, 1, 0j, -1)), (1, 1))

    def test_direct_two_term(self):
        chi = next(c for c in all_characters(3) if is_principal(c))
        expect = varphi_brute(2, 3, (1, 1)) + varphi_brute(2, 3, (2, 2))
        assert abs(S_sum(3, chi, (1, 1)) - expect) < 1e-10

    def test_matches_brute_sum(self):
        for d1 in (3, 5, 7):
            for chi in all_characters(d1):
                for m in [(1, 2), (1, 1), (2, 0)]:
                    direct = sum(varphi_brute(2, d1, tuple(t * x for x in m))
                                 * complex(chi(t)).conjugate()
                                 for t in range(1, d1) if math.gcd(t, d1) == 1)
                    assert abs(S_sum(d1, chi, m) - direct) < 1e-9, (d1, m)

    def test_vanishing_at_dividing_prime(self):
        # p | |m|^2 with chi non-principal mod p forces zero
        cases = [(5, (1, 2)), (3, (1, 1, 1)), (13, (2, 3)), (7, (1, 2, 1, 1))]
        for p, m in cases:
            for chi in all_characters(p):
                if is_principal(chi):
                    continue
                assert abs(S_sum(p, chi, m)) < 1e-10, (p, m)

    def test_vanishing_quadratic_twist(self):
        # chi induced by chi_D (so chi * chi_D principal, chi non-principal)
        cases = [((1, 2), 5), ((1, 1, 1), -3), ((2, 3), 13), ((1, 3, 1), -11),
                 ((3, 2, 1, 1), -15)]
        for m, D in cases:
            norm2 = sum(x * x for x in m)
            assert abs(D) == norm2 and D % 4 != 3
            base = char_from_D(D)
            q = base.q
            assert q % 2 == 1 and q > 1
            for d1 in range(q, 16, q):
                if d1 % 2 == 0 or any(e > 1 for _, e in factorize(d1)):
                    continue
                chi = induced_char(base, d1)
                assert abs(S_sum(d1, chi, m)) < 1e-10, (m, D, d1)

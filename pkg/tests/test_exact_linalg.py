"""Tests for the exact integer matrix kernel.

The SNF checks use an independent oracle: the product d1*...*dk of invariant
factors equals the gcd of all k x k minors. The HNF checks verify the
factorization H = M @ U, unimodularity of U, and the pivot normalization
directly from the definition.
"""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from k0lat.exact_linalg import (
    IntMatrix,
    ModPMatrix,
    RatMatrix,
    det_mod_p,
    hnf,
    integer_kernel,
    kernel_mod_prime_power,
    nullspace_mod_p,
    rank_mod_p,
    snf,
    snf_diagonal,
    solve_integer,
    xgcd,
)


# ---------------------------------------------------------------------------
# oracles


def gcd_of_minors(m: IntMatrix, k: int) -> int:
    """gcd of all k x k minors, computed by brute-force enumeration."""
    g = 0
    for rows in itertools.combinations(range(m.rows), k):
        for cols in itertools.combinations(range(m.cols), k):
            sub = IntMatrix.from_rows([[m.data[i][j] for j in cols] for i in rows])
            g = xgcd(g, sub.det())[0]
    return g


def snf_oracle(m: IntMatrix) -> list[int]:
    """Invariant factors from the gcd-of-minors formula."""
    out = []
    prev = 1
    for k in range(1, min(m.rows, m.cols) + 1):
        g = gcd_of_minors(m, k)
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def is_hermite_column_form(h: IntMatrix) -> bool:
    """Literal check of the fixed convention."""
    pivot_rows = []
    seen_zero = False
    for j in range(h.cols):
        col = h.col(j)
        nz = [i for i, x in enumerate(col) if x != 0]
        if not nz:
            seen_zero = True
            continue
        if seen_zero:
            return False  # zero columns must trail
        r = nz[0]
        if pivot_rows and r <= pivot_rows[-1]:
            return False
        piv = h.data[r][j]
        if piv <= 0:
            return False
        for jj in range(j):
            if not (0 <= h.data[r][jj] < piv):
                return False
        pivot_rows.append(r)
    return True


def check_hnf(m: IntMatrix):
    h, u = hnf(m)
    assert abs(u.det()) == 1
    assert m * u == h
    assert is_hermite_column_form(h)
    return h, u


def check_snf(m: IntMatrix):
    d, u, v = snf(m)
    assert abs(u.det()) == 1
    assert abs(v.det()) == 1
    assert u * m * v == d
    diag = [d.data[i][i] for i in range(min(m.rows, m.cols))]
    for i in range(m.rows):
        for j in range(m.cols):
            if i != j:
                assert d.data[i][j] == 0
    nonzero = [x for x in diag if x != 0]
    assert all(x > 0 for x in nonzero)
    for a, b in zip(nonzero, nonzero[1:]):
        assert b % a == 0
    assert diag[len(nonzero):] == [0] * (len(diag) - len(nonzero))
    assert nonzero == snf_oracle(m)
    return d, u, v


# ---------------------------------------------------------------------------
# spec examples


def test_hnf_identity():
    h, u = hnf(IntMatrix.identity(2))
    assert h == IntMatrix.identity(2)
    assert u == IntMatrix.identity(2)


def test_hnf_spec_example():
    m = IntMatrix.from_rows([[2, 1], [0, 3]])
    h, u = check_hnf(m)
    assert h == IntMatrix.from_rows([[1, 0], [3, 6]])
    # both original columns lie in the span of H
    for j in range(2):
        b = m.col(j)
        assert solve_integer(h, b) is not None


def test_hnf_zero_matrix():
    m = IntMatrix.zeros(3, 2)
    h, u = hnf(m)
    assert h == IntMatrix.zeros(3, 2)
    assert u == IntMatrix.identity(2)


def test_snf_spec_examples():
    d, _, _ = snf(IntMatrix.from_rows([[2, 0], [0, 3]]))
    assert [d.data[0][0], d.data[1][1]] == [1, 6]
    d, _, _ = snf(IntMatrix.identity(3))
    assert d == IntMatrix.identity(3)
    d, _, _ = snf(IntMatrix.from_rows([[0]]))
    assert d == IntMatrix.from_rows([[0]])


def test_solve_integer_examples():
    x, kernel = solve_integer(IntMatrix.from_rows([[2]]), [4])
    assert x == [2] and kernel == []
    assert solve_integer(IntMatrix.from_rows([[2]]), [3]) is None
    x, kernel = solve_integer(IntMatrix.from_rows([[1, 1]]), [0])
    assert IntMatrix.from_rows([[1, 1]]).mul_vec(x) == [0]
    assert len(kernel) == 1
    a, b = kernel[0]
    assert a + b == 0 and abs(a) == 1


# ---------------------------------------------------------------------------
# exhaustive and randomized property suites


def test_hnf_snf_exhaustive_2x2_small():
    vals = range(-3, 4)
    count = 0
    for a, b, c, d in itertools.product(vals, repeat=4):
        m = IntMatrix.from_rows([[a, b], [c, d]])
        check_hnf(m)
        check_snf(m)
        count += 1
    assert count == 7**4


@pytest.mark.parametrize("n,trials", [(3, 300), (4, 200)])
def test_snf_random_vs_minor_oracle(n, trials):
    rng = random.Random(1234 + n)
    for _ in range(trials):
        m = IntMatrix.from_rows([[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)])
        check_snf(m)


def test_hnf_random_rectangular():
    rng = random.Random(7)
    for _ in range(120):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 4)
        m = IntMatrix.from_rows([[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)])
        check_hnf(m)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(-30, 30), min_size=3, max_size=3),
        min_size=2,
        max_size=4,
    )
)
def test_hnf_factorization_property(rows):
    m = IntMatrix.from_rows(rows)
    check_hnf(m)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(-9, 9), min_size=2, max_size=2),
        min_size=2,
        max_size=3,
    ),
    st.lists(st.integers(-20, 20), min_size=2, max_size=2),
)
def test_solve_integer_substitution_property(rows, x_true):
    a = IntMatrix.from_rows(rows)
    b = a.mul_vec(x_true)
    sol = solve_integer(a, b)
    assert sol is not None
    x, kernel = sol
    assert a.mul_vec(x) == b
    for v in kernel:
        assert a.mul_vec(v) == [0] * a.rows
    assert len(kernel) == a.cols - len(snf_diagonal(a))


def test_integer_kernel_rank():
    a = IntMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
    ker = integer_kernel(a)
    assert len(ker) == 2
    for v in ker:
        assert a.mul_vec(v) == [0, 0]


# ---------------------------------------------------------------------------
# rational and modular helpers


def test_rat_inverse_and_solve():
    m = RatMatrix.from_rows([[1, 2], [3, 5]])
    inv = m.inverse()
    assert m * inv == RatMatrix.identity(2)
    rhs = RatMatrix.from_rows([[1], [0]])
    x = m.solve(rhs)
    assert m * x == rhs
    singular = RatMatrix.from_rows([[1, 2], [2, 4]])
    assert singular.rank() == 1
    assert singular.solve(RatMatrix.from_rows([[1], [0]])) is None


def test_rat_kernel():
    m = RatMatrix.from_rows([[1, 1, 0], [0, 0, 1]])
    ker = m.kernel()
    assert len(ker) == 1
    v = ker[0]
    assert m.mul_vec(v) == [Fraction(0), Fraction(0)]


def test_modp_inverse_and_det():
    m = ModPMatrix.from_int(IntMatrix.from_rows([[1, 2], [3, 4]]), 7, 2)
    inv = m.inverse()
    assert (m * inv) == ModPMatrix.identity(2, 7, 2)
    assert det_mod_p([[1, 2], [3, 4]], 7) == (4 - 6) % 7
    assert rank_mod_p([[1, 2], [2, 4]], 5) == 1


def test_nullspace_mod_p():
    basis = nullspace_mod_p([[1, 1, 0]], 5)
    assert len(basis) == 2
    for v in basis:
        assert (v[0] + v[1]) % 5 == 0


def test_kernel_mod_prime_power():
    # x * p == 0 mod p^2 has solutions p * Z/p^2
    a = IntMatrix.from_rows([[5]])
    gens = kernel_mod_prime_power(a, 5, 2)
    assert gens == [([5], 1)] or gens == [([20], 1)]
    # free kernel direction survives at full order
    a = IntMatrix.from_rows([[1, 1]])
    gens = kernel_mod_prime_power(a, 5, 3)
    assert any(e == 3 for _, e in gens)
    for v, _ in gens:
        assert (v[0] + v[1]) % 125 == 0


def test_charpoly():
    m = IntMatrix.from_rows([[2, 1], [0, 3]])
    assert m.charpoly() == [1, -5, 6]

"""Lattice arithmetic, canonicalization, localization, primary splitting."""

import random
from fractions import Fraction

import pytest

from k0lat.errors import AmbientMismatchError, K0Error
from k0lat.exact_linalg import IntMatrix, snf_diagonal
from k0lat.lattices import (
    GLOBAL_Z,
    Lattice,
    lattice_intersect,
    lattice_sum,
    local_at,
    localize,
    primary_components,
    quotient_invariants,
    saturation_basis,
)


def zlat(gens, n, base=GLOBAL_Z):
    return Lattice.from_generators(gens, n, base)


def test_sum_gcd_and_idempotence():
    two = zlat([[2]], 1)
    three = zlat([[3]], 1)
    assert lattice_sum(two, three) == zlat([[1]], 1)
    m = zlat([[2, 1], [0, 3]], 2)
    assert lattice_sum(m, m) == m


def test_sum_derived_example():
    a = zlat([[2, 0], [0, 2]], 2)
    b = zlat([[1, 1]], 2)
    s = lattice_sum(a, b)
    # HNF columns (1,1),(0,2); index 2 in Z^2
    assert s == zlat([[1, 1], [0, 2]], 2)
    assert quotient_invariants(Lattice.standard(2), s) == [2]


def test_intersect_examples():
    assert lattice_intersect(zlat([[2]], 1), zlat([[3]], 1)) == zlat([[6]], 1)
    m = zlat([[2, 0], [0, 2]], 2)
    n = Lattice.standard(2)
    assert lattice_intersect(m, n) == m
    half = zlat([[Fraction(1, 2), Fraction(1, 2)], [0, 1]], 2)
    meet = lattice_intersect(Lattice.standard(2), half)
    # oracle: membership of the unit vectors in both lattices
    assert half.contains([1, 0]) and half.contains([0, 1])
    assert meet == Lattice.standard(2)


def test_join_meet_laws_random():
    rng = random.Random(99)
    for _ in range(40):
        n = rng.randint(1, 4)
        a = zlat([[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)], n)
        b = zlat([[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)], n)
        if a.rank < n or b.rank < n:
            continue
        s = lattice_sum(a, b)
        m = lattice_intersect(a, b)
        assert s.contains_lattice(a) and s.contains_lattice(b)
        assert a.contains_lattice(m) and b.contains_lattice(m)
        # absorption
        assert lattice_sum(a, lattice_intersect(a, b)) == a
        assert lattice_intersect(a, lattice_sum(a, b)) == a


def test_quotient_invariants_examples():
    assert quotient_invariants(zlat([[1]], 1), zlat([[6]], 1)) == [6]
    m = zlat([[5, 1], [0, 2]], 2)
    assert quotient_invariants(m, m) == []
    assert quotient_invariants(Lattice.standard(2), zlat([[2, 0], [0, 3]], 2)) == [6]
    oracle = snf_diagonal(IntMatrix.from_rows([[2, 0], [0, 3]]))
    assert [x for x in oracle if x > 1] == [6]


def test_quotient_errors():
    with pytest.raises(K0Error):
        quotient_invariants(zlat([[2]], 1), zlat([[3]], 1))
    with pytest.raises(K0Error):
        quotient_invariants(Lattice.standard(2), zlat([[1, 0]], 2))
    with pytest.raises(AmbientMismatchError):
        quotient_invariants(Lattice.standard(2), Lattice.standard(3))


def test_localize_examples():
    six = zlat([[6]], 1)
    loc2 = localize(six, 2)
    assert loc2 == zlat([[2]], 1, local_at(2))
    assert loc2.scale == 2 and loc2.basis == IntMatrix.identity(1)
    assert localize(Lattice.standard(2), 5) == Lattice.standard(2, local_at(5))
    "index 2 is a unit at 3"
    m = zlat([[1, 1], [0, 2]], 2)
    assert localize(m, 3) == Lattice.standard(2, local_at(3))
    assert localize(m, 2) == zlat([[1, 1], [0, 2]], 2, local_at(2))


def test_local_canonicalization_absorbs_units():
    a = zlat([[3]], 1, local_at(2))
    assert a == zlat([[1]], 1, local_at(2))
    b = zlat([[Fraction(5, 3)]], 1, local_at(2))
    assert b == zlat([[1]], 1, local_at(2))
    c = zlat([[Fraction(4, 3)]], 1, local_at(2))
    assert c.scale == 4


def test_localize_distributes_over_sum_and_intersection():
    rng = random.Random(5)
    for _ in range(30):
        n = rng.randint(1, 4)
        p = rng.choice([2, 3, 5])
        a = zlat([[rng.randint(-6, 6) for _ in range(n)] for _ in range(n)], n)
        b = zlat([[rng.randint(-6, 6) for _ in range(n)] for _ in range(n)], n)
        if a.rank < n or b.rank < n:
            continue
        assert localize(lattice_sum(a, b), p) == lattice_sum(localize(a, p), localize(b, p))
        assert localize(lattice_intersect(a, b), p) == lattice_intersect(
            localize(a, p), localize(b, p)
        )


def test_saturation_basis():
    h = IntMatrix.from_cols([[2, 4]], rows=2)
    sat = saturation_basis(h)
    assert sat.columns() == [[1, 2]]


def test_primary_components_z_6z():
    dec = primary_components(zlat([[1]], 1), zlat([[6]], 1))
    assert dec.primes == [2, 3]
    assert dec.components[2] == zlat([[2]], 1)
    assert dec.components[3] == zlat([[3]], 1)
    assert dec.witness is not None
    assert snf_diagonal(dec.witness) == [1, 1]


def test_primary_components_trivial_and_single():
    n = zlat([[5, 1], [0, 3]], 2)
    dec = primary_components(n, n)
    assert dec.components == {} and dec.primes == []
    big = Lattice.standard(2)
    sub = zlat([[2, 0], [0, 2]], 2)
    dec = primary_components(big, sub)
    assert dec.primes == [2]
    assert dec.components[2] == sub


def check_primary(big, sub):
    dec = primary_components(big, sub)
    index_primes = dec.primes
    meet = big
    for p in index_primes:
        comp = dec.components[p]
        # localization conditions hold exactly
        assert localize(comp, p) == localize(sub, p)
        for q in index_primes:
            if q != p:
                assert localize(comp, q) == localize(big, q)
        meet = lattice_intersect(meet, comp)
    assert meet == sub
    if len(index_primes) >= 2:
        total = big.rank * len(index_primes)
        assert snf_diagonal(dec.witness) == [1] * total
    return dec


def test_primary_components_random():
    rng = random.Random(11)
    done = 0
    while done < 25:
        n = rng.randint(1, 3)
        big = zlat([[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)], n)
        if big.rank < n:
            continue
        diag = [rng.choice([1, 2, 3, 4, 6, 12]) for _ in range(n)]
        sub_gens = [[d * x for x in col] for d, col in zip(diag, big.generators())]
        sub = Lattice.from_generators(sub_gens, n)
        check_primary(big, sub)
        done += 1


def test_membership_with_scale():
    m = zlat([[Fraction(1, 2)]], 1)
    assert m.contains([Fraction(3, 2)])
    assert not m.contains([Fraction(1, 3)])
    loc = zlat([[1]], 1, local_at(3))
    assert loc.contains([Fraction(1, 2)])
    assert not loc.contains([Fraction(1, 3)])

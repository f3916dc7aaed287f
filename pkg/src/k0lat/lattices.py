"""R-lattices inside Q^n for R = Z or Z localized at one prime.

A lattice is stored as a positive rational scale times the column span of an
HNF-canonical integer basis. Canonicalization rules make equality structural:

* global base: the basis has content 1 (the gcd of all entries), so the scale
  is uniquely determined;
* local base at p: the basis is saturated away from p (the quotient of its
  saturation by it is a p-group), its content is prime to p, and the scale is
  a power of p. Units at p absorbed silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import AmbientMismatchError, DimensionError, K0Error
from .exact_linalg import (
    IntMatrix,
    RatMatrix,
    factorize,
    hnf,
    integer_kernel,
    is_prime,
    snf,
    snf_diagonal,
    solve_integer_matrix,
    valuation,
    xgcd,
)


@dataclass(frozen=True)
class BaseRing:
    """Z (prime=None) or Z localized at a prime."""

    prime: int | None = None

    def __post_init__(self):
        if self.prime is not None and not is_prime(self.prime):
            raise K0Error(f"{self.prime} is not prime")

    @property
    def is_local(self) -> bool:
        return self.prime is not None

    def __str__(self) -> str:
        return "Z" if self.prime is None else f"Z_({self.prime})"


GLOBAL_Z = BaseRing(None)


def local_at(p: int) -> BaseRing:
    return BaseRing(p)


def saturation_basis(h: IntMatrix) -> IntMatrix:
    """HNF basis of (Q-span of the columns of h) intersected with Z^n."""
    n, r = h.rows, h.cols
    if r == 0:
        return IntMatrix(n, 0, [[] for _ in range(n)])
    if r == n:
        return IntMatrix.identity(n)
    dual = integer_kernel(h.transpose())
    if not dual:
        return IntMatrix.identity(n)
    sat_cols = integer_kernel(IntMatrix.from_rows(dual))
    sh, _ = hnf(IntMatrix.from_cols(sat_cols, rows=n))
    return _strip_zero_columns(sh)


def _strip_zero_columns(m: IntMatrix) -> IntMatrix:
    cols = [c for c in m.columns() if any(x != 0 for x in c)]
    return IntMatrix.from_cols(cols, rows=m.rows)


class Lattice:
    """Full-column-rank lattice in Q^n over Z or Z_(p), canonical form."""

    __slots__ = ("ambient_dim", "base", "basis", "scale")

    def __init__(self, ambient_dim: int, base: BaseRing, basis: IntMatrix, scale: Fraction):
        # trusted constructor: callers go through from_generators
        self.ambient_dim = ambient_dim
        self.base = base
        self.basis = basis
        self.scale = scale

    # -- construction -------------------------------------------------------

    @classmethod
    def from_generators(cls, gens, ambient_dim: int, base: BaseRing = GLOBAL_Z) -> "Lattice":
        """Smallest lattice containing the given rational column vectors."""
        cols = []
        for g in gens:
            if len(g) != ambient_dim:
                raise DimensionError("generator length mismatch")
            col = [Fraction(x) for x in g]
            if any(x != 0 for x in col):
                cols.append(col)
        if not cols:
            return cls(ambient_dim, base, IntMatrix(ambient_dim, 0, [[] for _ in range(ambient_dim)]), Fraction(1))
        g = RatMatrix.from_cols(cols)
        b, d = g.scaled_integer()
        h = _strip_zero_columns(hnf(b)[0])
        if base.is_local:
            return cls._canonical_local(ambient_dim, base, h, d)
        c = h.content()
        basis = IntMatrix(h.rows, h.cols, [[x // c for x in row] for row in h.data])
        return cls(ambient_dim, base, basis, Fraction(c, d))

    @classmethod
    def _canonical_local(cls, n: int, base: BaseRing, h: IntMatrix, denom: int) -> "Lattice":
        p = base.prime
        e = -valuation(denom, p) if denom % p == 0 else 0
        sat = saturation_basis(h)
        t = solve_integer_matrix(sat, h)
        if t is None:
            raise K0Error("saturation does not contain the lattice")
        d, u, _ = snf(t)
        u_inv, den = u.to_rational().inverse().scaled_integer()
        if den != 1:
            raise K0Error("unimodular inverse must be integral")
        new_sat = sat * u_inv
        r = h.cols
        powers = [p ** valuation(d.data[i][i], p) for i in range(r)]
        m = IntMatrix.from_cols(
            [[x * powers[j] for x in new_sat.col(j)] for j in range(r)], rows=n
        )
        hm = _strip_zero_columns(hnf(m)[0])
        while hm.cols and all(x % p == 0 for row in hm.data for x in row):
            hm = IntMatrix(hm.rows, hm.cols, [[x // p for x in row] for row in hm.data])
            e += 1
        return cls(n, base, hm, Fraction(p) ** e)

    @classmethod
    def standard(cls, n: int, base: BaseRing = GLOBAL_Z) -> "Lattice":
        return cls(n, base, IntMatrix.identity(n), Fraction(1))

    @classmethod
    def zero(cls, n: int, base: BaseRing = GLOBAL_Z) -> "Lattice":
        return cls(n, base, IntMatrix(n, 0, [[] for _ in range(n)]), Fraction(1))

    # -- basics --------------------------------------------------------------

    @property
    def rank(self) -> int:
        return self.basis.cols

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Lattice)
            and self.ambient_dim == other.ambient_dim
            and self.base == other.base
            and self.scale == other.scale
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.ambient_dim, self.base, self.scale, self.basis))

    def __repr__(self) -> str:
        return f"Lattice({self.scale} * {self.basis.columns()} over {self.base})"

    def key(self):
        """Canonical sortable serialization."""
        return (
            self.ambient_dim,
            str(self.base),
            str(self.scale),
            tuple(tuple(r) for r in self.basis.data),
        )

    def rational_basis(self) -> RatMatrix:
        """Basis columns with the scale applied, as exact rationals."""
        s = self.scale
        return RatMatrix(
            self.basis.rows,
            self.basis.cols,
            [[s * x for x in row] for row in self.basis.data],
        )

    def generators(self) -> list[list[Fraction]]:
        return self.rational_basis().columns()

    def scaled_by(self, q) -> "Lattice":
        q = Fraction(q)
        if q <= 0:
            raise K0Error("scale factor must be positive")
        return Lattice.from_generators(
            [[q * x for x in col] for col in self.generators()], self.ambient_dim, self.base
        )

    def _check_compatible(self, other: "Lattice"):
        if self.ambient_dim != other.ambient_dim or self.base != other.base:
            raise AmbientMismatchError("lattices live in different ambient spaces or rings")

    def coords_of(self, v) -> list[Fraction] | None:
        """Coordinates of an ambient vector in this lattice's scaled basis (over Q)."""
        rb = self.rational_basis()
        rhs = RatMatrix.from_cols([[Fraction(x) for x in v]])
        sol = rb.solve(rhs)
        if sol is None:
            return None
        return sol.col(0)

    def contains(self, v) -> bool:
        coords = self.coords_of(v)
        if coords is None:
            return False
        if self.base.is_local:
            p = self.base.prime
            return all(c.denominator % p != 0 for c in coords)
        return all(c.denominator == 1 for c in coords)

    def contains_lattice(self, other: "Lattice") -> bool:
        self._check_compatible(other)
        return all(self.contains(g) for g in other.generators())

    def coords_matrix(self, other: "Lattice") -> RatMatrix | None:
        """Columns of `other` expressed in this lattice's scaled basis."""
        rb = self.rational_basis()
        return rb.solve(other.rational_basis())

    # -- arithmetic ----------------------------------------------------------

    def sum(self, other: "Lattice") -> "Lattice":
        self._check_compatible(other)
        return Lattice.from_generators(
            self.generators() + other.generators(), self.ambient_dim, self.base
        )

    def intersect(self, other: "Lattice") -> "Lattice":
        self._check_compatible(other)
        if self.rank == 0 or other.rank == 0:
            return Lattice.zero(self.ambient_dim, self.base)
        a = self.rational_basis()
        b = other.rational_basis()
        stacked = RatMatrix(
            a.rows,
            a.cols + b.cols,
            [ra + [-x for x in rb] for ra, rb in zip(a.data, b.data)],
        )
        m, d = stacked.scaled_integer()
        kernel = integer_kernel(m)
        gens = []
        a_int = IntMatrix(
            a.rows, a.cols, [[int(x * d) for x in row] for row in a.data]
        )
        for w in kernel:
            x = w[: a.cols]
            gens.append([Fraction(c, d) for c in a_int.mul_vec(x)])
        return Lattice.from_generators(gens, self.ambient_dim, self.base)

    def quotient_invariants(self, sub: "Lattice") -> list[int]:
        """Invariant factors (>1) of self/sub; requires sub <= self, equal rank."""
        self._check_compatible(sub)
        if sub.rank != self.rank:
            raise K0Error("quotient is infinite: ranks differ")
        if self.rank == 0:
            return []
        t = self.coords_matrix(sub)
        if t is None:
            raise K0Error("sublattice does not lie in the span")
        ti, d = t.scaled_integer()
        if self.base.is_local:
            p = self.base.prime
            if d % p == 0:
                raise K0Error("not a sublattice at the local prime")
            factors = [p ** valuation(x, p) for x in snf_diagonal(ti)]
        else:
            if d != 1:
                raise K0Error("not a sublattice over Z")
            factors = snf_diagonal(ti)
        if len(factors) != self.rank:
            raise K0Error("sublattice has lower rank inside the span")
        return [f for f in factors if f > 1]

    def index_in(self, ambient: "Lattice") -> int:
        """[ambient : self] (1 when equal; local base counts only p-part)."""
        inv = ambient.quotient_invariants(self)
        out = 1
        for f in inv:
            out *= f
        return out

    def localize(self, p: int) -> "Lattice":
        """Localization of a global lattice at p, canonical Z_(p)-form."""
        if self.base.is_local:
            if self.base.prime != p:
                raise K0Error("lattice is already local at a different prime")
            return self
        return Lattice.from_generators(self.generators(), self.ambient_dim, local_at(p))


def lattice_sum(m: Lattice, n: Lattice) -> Lattice:
    return m.sum(n)


def lattice_intersect(m: Lattice, n: Lattice) -> Lattice:
    return m.intersect(n)


def quotient_invariants(n: Lattice, m: Lattice) -> list[int]:
    return n.quotient_invariants(m)


def localize(m: Lattice, p: int) -> Lattice:
    return m.localize(p)


@dataclass
class PrimaryDecomposition:
    """Outcome of the prime-by-prime splitting of a finite-index sublattice.

    components[p] is the lattice agreeing with the sublattice at p and with
    the big lattice elsewhere; witness, when at least two primes occur, is a
    unimodular integer matrix giving (+) components ~ sub (+) (r-1) * big in
    the canonical coordinate columns recorded alongside.
    """

    components: dict[int, Lattice]
    primes: list[int]
    witness: IntMatrix | None

    def component_ranks(self) -> list[int]:
        return [self.components[p].rank for p in self.primes]


def _block_matrix(blocks, row_sizes, col_sizes) -> IntMatrix:
    rows = sum(row_sizes)
    cols = sum(col_sizes)
    out = [[0] * cols for _ in range(rows)]
    r0 = 0
    for bi, rs in enumerate(row_sizes):
        c0 = 0
        for bj, cs in enumerate(col_sizes):
            blk = blocks.get((bi, bj))
            if blk is not None:
                for i in range(rs):
                    for j in range(cs):
                        out[r0 + i][c0 + j] = blk.data[i][j]
            c0 += cs
        r0 += rs
    return IntMatrix(rows, cols, out)


def _integer_coords(big: Lattice, small: Lattice) -> IntMatrix:
    """Columns of `small` in the basis of `big`, p-denominators cleared away.

    Over a local base, denominators prime to p are units and are not allowed
    to appear here by construction; assert integrality after clearing none.
    """
    t = big.coords_matrix(small)
    if t is None:
        raise K0Error("expected sublattice of the same span")
    ti, d = t.scaled_integer()
    if big.base.is_local:
        p = big.base.prime
        if d % p == 0:
            raise K0Error("coordinates not integral at the local prime")
        # clear the unit denominator by multiplying with its inverse mod nothing:
        # keep exact rationals out by scaling the basis columns instead.
        if d != 1:
            raise K0Error("canonical local bases should give unit denominator 1")
    elif d != 1:
        raise K0Error("coordinates not integral over Z")
    return ti


def primary_components(big: Lattice, sub: Lattice) -> PrimaryDecomposition:
    """Split big >= sub of finite index into one piece per prime dividing it.

    Each piece matches sub at its prime and big elsewhere; their intersection
    is sub, and an explicit unimodular witness for
    (+)_p piece_p ~ sub (+) (r-1) big is produced via an integer section of
    the consecutive-sums surjection.
    """
    big._check_compatible(sub)
    if sub.rank != big.rank:
        raise K0Error("infinite index: ranks differ")
    r_lat = big.rank
    if r_lat == 0 or big == sub:
        return PrimaryDecomposition({}, [], None)
    invariants = big.quotient_invariants(sub)  # also validates containment
    index = 1
    for f in invariants:
        index *= f
    primes = sorted(factorize(index))
    # aligned bases: big ~ span(B'), sub ~ span(B' * D) with D = diag from SNF
    t = _integer_coords(big, sub)
    d, u, _ = snf(t)
    u_inv, den = u.to_rational().inverse().scaled_integer()
    if den != 1:
        raise K0Error("unimodular inverse must be integral")
    big_scaled = big.rational_basis() * u_inv.to_rational()
    components = {}
    for p in primes:
        cols = []
        for j in range(r_lat):
            pw = p ** valuation(d.data[j][j], p)
            cols.append([x * pw for x in big_scaled.col(j)])
        components[p] = Lattice.from_generators(cols, big.ambient_dim, big.base)
    r = len(primes)
    if r <= 1:
        return PrimaryDecomposition(components, primes, None)

    # witness construction: section of phi(u_1..u_r) = (u_1+u_2, ..., u_{r-1}+u_r)
    comp_coords = [_integer_coords(big, components[p]) for p in primes]
    phi = _block_matrix(
        {(j, i): comp_coords[i] for j in range(r - 1) for i in (j, j + 1)},
        [r_lat] * (r - 1),
        [r_lat] * r,
    )
    section = solve_integer_matrix(phi, IntMatrix.identity((r - 1) * r_lat))
    if section is None:
        raise K0Error("primary splitting section must exist over Z")
    # inclusion of sub into each component, alternating signs spans ker(phi)
    incl_blocks = {}
    for i, p in enumerate(primes):
        ci = components[p].coords_matrix(sub)
        ci_int, den = ci.scaled_integer()
        if den != 1 and not (big.base.is_local and den % big.base.prime != 0):
            raise K0Error("inclusion coordinates must be integral")
        if den != 1:
            raise K0Error("canonical local coordinates should be integral")
        sign = 1 if i % 2 == 0 else -1
        incl_blocks[(i, 0)] = ci_int * sign
    iota = _block_matrix(incl_blocks, [r_lat] * r, [r_lat])
    total = r * r_lat
    proj = IntMatrix.identity(total) - section * phi
    rho = solve_integer_matrix(iota, proj)
    if rho is None:
        raise K0Error("kernel retraction must exist over Z")
    witness = _block_matrix(
        {(0, 0): rho} | {(1, 0): phi},
        [r_lat, (r - 1) * r_lat],
        [total],
    )
    diag = snf_diagonal(witness)
    if len(diag) != total or any(x != 1 for x in diag):
        raise K0Error("primary splitting witness is not unimodular")
    return PrimaryDecomposition(components, primes, witness)

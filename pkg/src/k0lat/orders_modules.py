"""Finite algebras by structure constants and their lattice modules.

Provides Hom/End lattices (integer bases of module homomorphisms), the
trace-form radical over prime fields, idempotent lifting modulo p^k, the
precision-managed decomposition of completed modules, and local isomorphism
testing. Completions are never symbolic: every completed statement is decided
over Z/p^k with a stability protocol (start at k0, double, compare
fingerprints, cap).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DimensionError,
    InconclusiveError,
    K0Error,
    UnstableDecompositionError,
    UnsupportedCharacteristicError,
    ValidationError,
)
from .exact_linalg import (
    IntMatrix,
    ModPMatrix,
    RatMatrix,
    det_mod_p,
    integer_kernel,
    kernel_mod_prime_power,
    nullspace_mod_p,
    rank_mod_p,
    valuation,
)
from .lattices import GLOBAL_Z, BaseRing, Lattice, local_at

DEFAULT_PRECISION = 8
MAX_PRECISION = 256
DETERMINISTIC_SEARCH_BOUND = 10**6
RANDOM_SEARCH_TRIALS = 10**4


class FiniteAlgebra:
    """Associative unital algebra over Z or Z_(p), given by structure constants.

    e_i * e_j = (1/den) * sum_k constants[i][j][k] e_k. Associativity and the
    unit laws are checked exactly at construction.
    """

    def __init__(self, base: BaseRing, rank: int, constants, unit, den: int = 1, name: str = ""):
        self.base = base
        self.rank = rank
        self.den = den
        self.constants = [[[int(x) for x in row] for row in plane] for plane in constants]
        self.unit = [Fraction(x) for x in unit]
        self.name = name
        if len(self.constants) != rank or any(
            len(plane) != rank or any(len(row) != rank for row in plane) for plane in self.constants
        ):
            raise DimensionError("structure constant tensor must be rank^3")
        if len(self.unit) != rank:
            raise DimensionError("unit coordinate length mismatch")
        if den <= 0:
            raise ValidationError("denominator must be positive")
        self._left_mult = [
            RatMatrix(
                rank,
                rank,
                [[Fraction(self.constants[i][j][k], den) for j in range(rank)] for k in range(rank)],
            )
            for i in range(rank)
        ]
        self._validate()

    def _validate(self):
        n, den = self.rank, self.den
        # den * L_i as integer matrices; associativity <=> M_i M_j = sum_k c_ijk M_k
        mats = [
            IntMatrix(n, n, [[self.constants[i][j][k] for j in range(n)] for k in range(n)])
            for i in range(n)
        ]
        for i in range(n):
            for j in range(n):
                lhs = mats[i] * mats[j]
                rhs = IntMatrix.zeros(n, n)
                for k in range(n):
                    c = self.constants[i][j][k]
                    if c:
                        rhs = rhs + mats[k] * c
                if lhs != rhs:
                    raise ValidationError(f"associativity fails on basis pair ({i},{j})")
        # unit laws: sum_i u_i c_ijk = den * delta_jk (left) and symmetrically (right)
        for j in range(n):
            for k in range(n):
                left = sum(Fraction(u) * self.constants[i][j][k] for i, u in enumerate(self.unit))
                right = sum(Fraction(u) * self.constants[j][i][k] for i, u in enumerate(self.unit))
                want = Fraction(den if j == k else 0)
                if left != want or right != want:
                    raise ValidationError(f"unit law fails at basis element {j}")

    def basis_vector(self, i: int) -> list[Fraction]:
        return [Fraction(1 if j == i else 0) for j in range(self.rank)]

    def multiply_basis(self, i: int, j: int) -> list[Fraction]:
        return [Fraction(self.constants[i][j][k], self.den) for k in range(self.rank)]

    def multiply(self, x, y) -> list[Fraction]:
        out = [Fraction(0)] * self.rank
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj:
                    continue
                c = self.constants[i][j]
                f = Fraction(xi) * Fraction(yj)
                for k in range(self.rank):
                    if c[k]:
                        out[k] += f * Fraction(c[k], self.den)
        return out

    def left_mult_matrix(self, i: int) -> RatMatrix:
        return self._left_mult[i]

    def structure_key(self):
        return (str(self.base), self.rank, self.den,
                tuple(tuple(tuple(r) for r in p) for p in self.constants),
                tuple(str(u) for u in self.unit))

    def same_algebra(self, other: "FiniteAlgebra") -> bool:
        return self is other or self.structure_key() == other.structure_key()

    def regular_module(self) -> "LatticeModule":
        """Left regular module on the standard lattice; needs integral action."""
        action = [self.left_mult_matrix(i) for i in range(self.rank)]
        carrier = Lattice.standard(self.rank, self.base)
        return LatticeModule(self, carrier, action, name=self.name or "regular")


class LatticeModule:
    """A lattice carrying an action of a finite algebra.

    The action is stored ambiently (one rational matrix per algebra basis
    element acting on Q^ambient); the matrix of the action in the carrier's
    canonical basis is derived and must be integral over Z, respectively
    p-integral over Z_(p).
    """

    def __init__(self, algebra: FiniteAlgebra, carrier: Lattice, ambient_action, name: str = "",
                 blocks=None, check: bool = True):
        self.algebra = algebra
        self.carrier = carrier
        self.ambient_action = list(ambient_action)
        self.name = name
        self.blocks = blocks  # list of (LatticeModule, offset) for direct sums
        self._carrier_action: list[RatMatrix] | None = None
        if check:
            self._validate()

    @property
    def rank(self) -> int:
        return self.carrier.rank

    @property
    def base(self) -> BaseRing:
        return self.carrier.base

    def _validate(self):
        n = self.carrier.ambient_dim
        if len(self.ambient_action) != self.algebra.rank:
            raise ValidationError("need one action matrix per algebra basis element")
        for m in self.ambient_action:
            if m.rows != n or m.cols != n:
                raise ValidationError("ambient action shape mismatch")
        if self.algebra.base != self.base:
            raise ValidationError("module and algebra base rings differ")
        act = self.carrier_action()
        for i, m in enumerate(act):
            for row in m.data:
                for x in row:
                    if self.base.is_local:
                        if x.denominator % self.base.prime == 0:
                            raise ValidationError(
                                f"action of basis element {i} does not preserve the carrier at p"
                            )
                    elif x.denominator != 1:
                        raise ValidationError(
                            f"action of basis element {i} does not preserve the carrier"
                        )
        # structure constants respected on the carrier
        alg = self.algebra
        for i in range(alg.rank):
            for j in range(alg.rank):
                lhs = act[i] * act[j]
                rhs_coeffs = alg.multiply_basis(i, j)
                rhs = RatMatrix(self.rank, self.rank,
                                [[Fraction(0)] * self.rank for _ in range(self.rank)])
                for k, c in enumerate(rhs_coeffs):
                    if c:
                        rhs = rhs + act[k] * c
                if lhs != rhs:
                    raise ValidationError(f"action violates structure constants at ({i},{j})")
        unit_mat = self.action_of(alg.unit, carrier=True)
        if unit_mat != RatMatrix.identity(self.rank):
            raise ValidationError("algebra unit does not act as identity on the carrier")

    def carrier_action(self) -> list[RatMatrix]:
        if self._carrier_action is None:
            b = self.carrier.rational_basis()
            out = []
            for m in self.ambient_action:
                sol = b.solve(m * b)
                if sol is None:
                    raise ValidationError("action does not preserve the carrier span")
                out.append(sol)
            self._carrier_action = out
        return self._carrier_action

    def action_of(self, coeffs, carrier: bool = False) -> RatMatrix:
        mats = self.carrier_action() if carrier else self.ambient_action
        dim = self.rank if carrier else self.carrier.ambient_dim
        out = RatMatrix(dim, dim, [[Fraction(0)] * dim for _ in range(dim)])
        for i, c in enumerate(coeffs):
            if c:
                out = out + mats[i] * Fraction(c)
        return out

    def carrier_action_mod(self, p: int, k: int) -> list[ModPMatrix]:
        mod = p**k
        out = []
        for m in self.carrier_action():
            data = []
            for row in m.data:
                new = []
                for x in row:
                    if x.denominator % p == 0:
                        raise ValidationError("action not p-integral")
                    new.append(x.numerator * pow(x.denominator, -1, mod) % mod)
                data.append(new)
            out.append(ModPMatrix(mod, p, k, self.rank, self.rank, data))
        return out

    def with_carrier(self, carrier: Lattice, name: str = "") -> "LatticeModule":
        """Same ambient action restricted to another stable lattice."""
        return LatticeModule(self.algebra, carrier, self.ambient_action, name=name)

    def localize(self, p: int) -> "LatticeModule":
        if self.base.is_local:
            if self.base.prime != p:
                raise K0Error("module already local at a different prime")
            return self
        loc_alg = _localized_algebra(self.algebra, p)
        blocks = None
        if self.blocks:
            blocks = [(m.localize(p), off) for m, off in self.blocks]
        return LatticeModule(loc_alg, self.carrier.localize(p), self.ambient_action,
                             name=self.name, blocks=blocks, check=False)

    def leaf_blocks(self) -> list[tuple["LatticeModule", int]]:
        if not self.blocks:
            return [(self, 0)]
        out = []
        for m, off in self.blocks:
            for leaf, sub in m.leaf_blocks():
                out.append((leaf, off + sub))
        return out

    def __repr__(self):
        return f"LatticeModule({self.name or 'anon'}, rank {self.rank} over {self.base})"


_LOCALIZED_CACHE: dict[tuple, FiniteAlgebra] = {}


def _localized_algebra(alg: FiniteAlgebra, p: int) -> FiniteAlgebra:
    if alg.base.is_local:
        if alg.base.prime != p:
            raise K0Error("algebra already local at a different prime")
        return alg
    key = (id(alg), p)
    if key not in _LOCALIZED_CACHE:
        _LOCALIZED_CACHE[key] = FiniteAlgebra(
            local_at(p), alg.rank, alg.constants, alg.unit, alg.den, name=alg.name
        )
    return _LOCALIZED_CACHE[key]


def direct_sum(modules: list[LatticeModule], name: str = "") -> LatticeModule:
    """Block-diagonal direct sum in a concatenated ambient space."""
    if not modules:
        raise K0Error("empty direct sum")
    alg = modules[0].algebra
    base = modules[0].base
    for m in modules[1:]:
        if not alg.same_algebra(m.algebra):
            raise K0Error("direct sum over different algebras")
        if m.base != base:
            raise K0Error("direct sum over different base rings")
    dims = [m.carrier.ambient_dim for m in modules]
    total = sum(dims)
    gens = []
    offset = 0
    for m, d in zip(modules, dims):
        for col in m.carrier.generators():
            gens.append([Fraction(0)] * offset + list(col) + [Fraction(0)] * (total - offset - d))
        offset += d
    carrier = Lattice.from_generators(gens, total, base)
    action = []
    for i in range(alg.rank):
        data = [[Fraction(0)] * total for _ in range(total)]
        offset = 0
        for m, d in zip(modules, dims):
            blk = m.ambient_action[i]
            for a in range(d):
                for b in range(d):
                    data[offset + a][offset + b] = blk.data[a][b]
            offset += d
        action.append(RatMatrix(total, total, data))
    blocks = []
    roff = 0
    for m in modules:
        blocks.append((m, roff))
        roff += m.rank
    out = LatticeModule(alg, carrier, action, name=name or "(+)".join(m.name for m in modules),
                        blocks=blocks, check=False)
    return out


# ---------------------------------------------------------------------------
# Hom and End


@dataclass
class HomSpace:
    """Integer basis of Hom(source, target): matrices in carrier coordinates."""

    source: LatticeModule
    target: LatticeModule
    basis: list[IntMatrix]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def element(self, coeffs) -> IntMatrix:
        out = IntMatrix.zeros(self.target.rank, self.source.rank)
        for c, b in zip(coeffs, self.basis):
            if c:
                out = out + b * int(c)
        return out

    def as_lattice(self) -> Lattice:
        """The Hom lattice inside matrix space, one vectorized column per basis element."""
        vecs = [[x for row in b.data for x in row] for b in self.basis]
        dim = self.target.rank * self.source.rank
        return Lattice.from_generators(vecs, dim, self.source.base)


def _commutation_system(act_src: list[RatMatrix], act_tgt: list[RatMatrix]) -> IntMatrix:
    """Integer matrix of X @ act_src[i] - act_tgt[i] @ X = 0 in vec(X), row-major."""
    rs = act_src[0].rows
    rt = act_tgt[0].rows
    rows = []
    for ai, bi in zip(act_src, act_tgt):
        for a in range(rt):
            for b in range(rs):
                row = [Fraction(0)] * (rt * rs)
                for c in range(rs):
                    row[a * rs + c] += ai.data[c][b]
                for c in range(rt):
                    row[c * rs + b] -= bi.data[a][c]
                rows.append(row)
    mat = RatMatrix(len(rows), rt * rs, rows)
    mi, _ = mat.scaled_integer()
    return mi


def hom_lattice(algebra: FiniteAlgebra, source: LatticeModule, target: LatticeModule) -> HomSpace:
    """Z-basis (Z_(p)-basis over a local base) of module homomorphisms.

    Solves the commutation equations exactly; block structure of direct sums
    is exploited so large Hom spaces assemble from small kernels.
    """
    if not algebra.same_algebra(source.algebra) or not algebra.same_algebra(target.algebra):
        raise K0Error("hom between modules over different algebras")
    if source.base != target.base:
        raise K0Error("hom between modules over different base rings")
    if source.blocks or target.blocks:
        return _hom_blockwise(algebra, source, target)
    system = _commutation_system(source.carrier_action(), target.carrier_action())
    kernel = integer_kernel(system)
    rs, rt = source.rank, target.rank
    basis = [IntMatrix(rt, rs, [v[a * rs:(a + 1) * rs] for a in range(rt)]) for v in kernel]
    return HomSpace(source, target, basis)


def _hom_blockwise(algebra, source, target) -> HomSpace:
    src_leaves = source.leaf_blocks()
    tgt_leaves = target.leaf_blocks()
    basis = []
    for s, soff in src_leaves:
        for t, toff in tgt_leaves:
            part = hom_lattice(algebra, s, t)
            for b in part.basis:
                big = IntMatrix.zeros(target.rank, source.rank)
                for i in range(t.rank):
                    for j in range(s.rank):
                        big.data[toff + i][soff + j] = b.data[i][j]
                basis.append(big)
    return HomSpace(source, target, basis)


@dataclass
class EndRing:
    """End(M) as a finite algebra together with its matrix realization."""

    module: LatticeModule
    algebra: FiniteAlgebra
    basis: list[IntMatrix]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def matrix_of(self, coeffs) -> IntMatrix:
        out = IntMatrix.zeros(self.module.rank, self.module.rank)
        for c, b in zip(coeffs, self.basis):
            if c:
                out = out + b * int(c)
        return out


def end_ring(algebra: FiniteAlgebra, module: LatticeModule) -> EndRing:
    """Endomorphism ring with structure constants from hom basis products."""
    hom = hom_lattice(algebra, module, module)
    basis = hom.basis
    m = len(basis)
    cols = RatMatrix.from_cols(
        [[Fraction(x) for row in b.data for x in row] for b in basis],
        rows=module.rank * module.rank,
    )
    p = module.base.prime if module.base.is_local else None
    # all m^2 products plus the identity, solved in one elimination pass
    rhs_cols = []
    for i in range(m):
        for j in range(m):
            prod = basis[i] * basis[j]
            rhs_cols.append([Fraction(x) for row in prod.data for x in row])
    rhs_cols.append(
        [Fraction(1 if (t // module.rank) == (t % module.rank) else 0)
         for t in range(module.rank * module.rank)]
    )
    rhs = RatMatrix.from_cols(rhs_cols, rows=module.rank * module.rank)
    sol = cols.solve(rhs)
    if sol is None:
        raise K0Error("product of endomorphisms escapes the End lattice")
    den = 1
    for t in range(m * m):
        for c in sol.col(t):
            if p is None:
                if c.denominator != 1:
                    raise K0Error("End structure constants must be integral over Z")
            elif c.denominator % p == 0:
                raise K0Error("End structure constants must be p-integral")
            den = den * c.denominator // _gcd(den, c.denominator)
    unit = sol.col(m * m)
    constants = [
        [[int(sol.data[k][i * m + j] * den) for k in range(m)] for j in range(m)]
        for i in range(m)
    ]
    alg = FiniteAlgebra(module.base, m, constants, unit, den,
                        name=f"End({module.name})" if module.name else "End")
    return EndRing(module, alg, basis)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------
# prime-field algebras, radical, idempotents


@dataclass
class ModPAlgebra:
    """Unital associative algebra over the prime field F_p."""

    p: int
    dim: int
    constants: list[list[list[int]]]  # reduced mod p
    unit: list[int]

    @classmethod
    def from_algebra(cls, alg: FiniteAlgebra, p: int) -> "ModPAlgebra":
        if alg.den % p == 0:
            raise K0Error("structure denominator not a unit mod p")
        inv = pow(alg.den, -1, p)
        constants = [
            [[(c * inv) % p for c in row] for row in plane] for plane in alg.constants
        ]
        unit = []
        for u in alg.unit:
            if u.denominator % p == 0:
                raise K0Error("unit coordinates not p-integral")
            unit.append(u.numerator * pow(u.denominator, -1, p) % p)
        return cls(p, alg.rank, constants, unit)

    def multiply(self, x, y) -> list[int]:
        p = self.p
        out = [0] * self.dim
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj:
                    continue
                f = (xi * yj) % p
                c = self.constants[i][j]
                for k in range(self.dim):
                    if c[k]:
                        out[k] = (out[k] + f * c[k]) % p
        return out

    def left_mult(self, x) -> list[list[int]]:
        cols = []
        for j in range(self.dim):
            ej = [1 if t == j else 0 for t in range(self.dim)]
            cols.append(self.multiply(x, ej))
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    def power(self, x, n: int) -> list[int]:
        out = list(self.unit)
        b = list(x)
        while n:
            if n & 1:
                out = self.multiply(out, b)
            b = self.multiply(b, b)
            n >>= 1
        return out

    def is_nilpotent(self, x) -> bool:
        y = list(x)
        for _ in range(self.dim + 1):
            if all(c == 0 for c in y):
                return True
            y = self.multiply(y, y)
        return all(c == 0 for c in y)


def radical_mod_p(alg: ModPAlgebra) -> list[list[int]]:
    """Jacobson radical basis via the trace form; requires p > dim.

    The returned vectors are verified nilpotent; the quotient by them is
    semisimple because the trace form is nondegenerate there.
    """
    p, n = alg.p, alg.dim
    if p <= n:
        raise UnsupportedCharacteristicError(
            f"trace-form radical needs p > dim, got p={p}, dim={n}"
        )
    mults = [alg.left_mult([1 if t == i else 0 for t in range(n)]) for i in range(n)]
    gram = []
    for i in range(n):
        row = []
        for j in range(n):
            tr = 0
            mi, mj = mults[i], mults[j]
            for a in range(n):
                for b in range(n):
                    tr += mi[a][b] * mj[b][a]
            row.append(tr % p)
        gram.append(row)
    basis = nullspace_mod_p(gram, p)
    for v in basis:
        if not alg.is_nilpotent(v):
            raise ValidationError("trace-form kernel contains a non-nilpotent element")
    return basis


def _gauss_coords(basis: list[list[int]], vecs: list[list[int]], p: int):
    """Express each vector in `vecs` in terms of `basis` over F_p (or None)."""
    if not basis:
        return [None if any(x % p for x in v) else [] for v in vecs]
    n = len(basis[0])
    m = len(basis)
    aug = [[basis[j][i] % p for j in range(m)] + [v[i] % p for v in vecs] for i in range(n)]
    pivots = []
    rank = 0
    for j in range(m):
        piv = None
        for i in range(rank, n):
            if aug[i][j]:
                piv = i
                break
        if piv is None:
            continue
        aug[rank], aug[piv] = aug[piv], aug[rank]
        inv = pow(aug[rank][j], -1, p)
        aug[rank] = [(x * inv) % p for x in aug[rank]]
        for i in range(n):
            if i != rank and aug[i][j]:
                f = aug[i][j]
                aug[i] = [(x - f * y) % p for x, y in zip(aug[i], aug[rank])]
        pivots.append(j)
        rank += 1
    out = []
    for t in range(len(vecs)):
        col = m + t
        ok = all(aug[i][col] == 0 for i in range(rank, n))
        if not ok:
            out.append(None)
            continue
        coeffs = [0] * m
        for i, j in enumerate(pivots):
            coeffs[j] = aug[i][col]
        out.append(coeffs)
    return out


def _span_basis(vecs: list[list[int]], p: int) -> list[list[int]]:
    """Row-reduce a spanning set into an F_p basis."""
    basis: list[list[int]] = []
    mat: list[list[int]] = []
    for v in vecs:
        row = [x % p for x in v]
        for b in mat:
            piv = next(i for i, x in enumerate(b) if x)
            if row[piv]:
                f = (row[piv] * pow(b[piv], -1, p)) % p
                row = [(x - f * y) % p for x, y in zip(row, b)]
        if any(row):
            mat.append(row)
            basis.append(v)
    return basis


# -- F_p[x] helpers ----------------------------------------------------------


def _poly_trim(f: list[int], p: int) -> list[int]:
    f = [x % p for x in f]
    while f and f[-1] == 0:
        f.pop()
    return f


def _poly_mul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return _poly_trim(out, p)


def _poly_divmod(f, g, p):
    f = _poly_trim(list(f), p)
    g = _poly_trim(list(g), p)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    q = [0] * max(0, len(f) - len(g) + 1)
    inv = pow(g[-1], -1, p)
    while len(f) >= len(g):
        c = (f[-1] * inv) % p
        d = len(f) - len(g)
        q[d] = c
        for i in range(len(g)):
            f[d + i] = (f[d + i] - c * g[i]) % p
        f = _poly_trim(f, p)
    return _poly_trim(q, p), f


def _poly_xgcd(f, g, p):
    r0, r1 = _poly_trim(list(f), p), _poly_trim(list(g), p)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = _poly_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_trim([a - b for a, b in _zip_pad(s0, _poly_mul(q, s1, p))], p)
        t0, t1 = t1, _poly_trim([a - b for a, b in _zip_pad(t0, _poly_mul(q, t1, p))], p)
    if r0:
        inv = pow(r0[-1], -1, p)
        r0 = [(x * inv) % p for x in r0]
        s0 = [(x * inv) % p for x in s0]
        t0 = [(x * inv) % p for x in t0]
    return r0, s0, t0


def _zip_pad(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0, b[i] if i < len(b) else 0) for i in range(n)]


def _factor_squarefree_parts(f: list[int], p: int) -> list[tuple[list[int], int]]:
    """Irreducible factors with multiplicities over F_p (via sympy)."""
    from sympy import GF, Poly, symbols

    x = symbols("x")
    poly = Poly(list(reversed(f)), x, domain=GF(p))
    _, factors = poly.factor_list()
    out = []
    for fac, mult in factors:
        coeffs = [int(c) % p for c in reversed(fac.all_coeffs())]
        out.append((coeffs, mult))
    return out


def _eval_poly_in_algebra(alg: ModPAlgebra, unit, x, f: list[int]) -> list[int]:
    out = [0] * alg.dim
    power = list(unit)
    for c in f:
        if c:
            out = [(a + c * b) % alg.p for a, b in zip(out, power)]
        power = alg.multiply(power, x)
    return out


def primitive_idempotents(alg: ModPAlgebra, j_basis: list[list[int]], rng: random.Random) -> list[list[int]]:
    """Complete orthogonal set of primitive idempotents of alg/J, lifted mod J.

    Works inside alg (mod p): splits the semisimple quotient by factoring
    minimal polynomials of (pseudo)random elements, recursing into corners
    until every corner is certified a field. The radical basis j_basis is
    used to recognize elements of J.
    """
    p = alg.p

    def mod_j_zero(v) -> bool:
        if not any(x % p for x in v):
            return True
        return _gauss_coords(j_basis, [v], p)[0] is not None if j_basis else False

    def corner_basis(e) -> list[list[int]]:
        vecs = []
        for i in range(alg.dim):
            ei = [1 if t == i else 0 for t in range(alg.dim)]
            vecs.append(alg.multiply(alg.multiply(e, ei), e))
        return _span_basis(vecs, p)

    def split(e, basis, depth=0) -> list[list[int]]:
        if depth > alg.dim + 4:
            raise InconclusiveError("idempotent splitting recursion exceeded bound")
        dim_ss = _semisimple_dim(basis)
        if dim_ss == 1:
            return [e]
        candidates = list(basis)
        for b1 in basis:
            for b2 in basis:
                if b1 is not b2:
                    candidates.append([(x + y) % p for x, y in zip(b1, b2)])
        tries = 0
        for x in _candidate_stream(candidates, basis, rng, p):
            tries += 1
            if tries > 200:
                break
            if mod_j_zero(x):
                continue
            g = _min_poly_mod_j(e, x)
            parts = _coprime_parts(g)
            if len(parts) == 1:
                f0, mult = parts[0]
                if mult == 1 and len(f0) - 1 == dim_ss:
                    return [e]  # corner is a field: e primitive
                continue
            idems = _crt_idempotents(e, x, g, parts)
            out = []
            for eps in idems:
                if mod_j_zero(eps):
                    continue
                out.extend(split(eps, corner_basis(eps), depth + 1))
            return out
        raise InconclusiveError("could not certify or split a corner algebra")

    def _semisimple_dim(basis) -> int:
        if not j_basis:
            return len(basis)
        # dim of corner mod J: rank of basis in alg/J
        quotient_rank = 0
        acc: list[list[int]] = list(j_basis)
        for v in basis:
            before = len(_span_basis(acc, p))
            acc.append(v)
            after = len(_span_basis(acc, p))
            if after > before:
                quotient_rank += 1
        return quotient_rank

    def _min_poly_mod_j(e, x):
        # min poly of the image of x in the corner of alg/J: compute powers
        # and look for dependence modulo span(J)
        powers = [list(e)]
        while True:
            nxt = alg.multiply(powers[-1], x)
            coords = _gauss_coords(j_basis + powers if j_basis else powers, [nxt], p)[0]
            if coords is not None:
                tail = coords[len(j_basis):] if j_basis else coords
                return _poly_trim([(-c) % p for c in tail] + [1], p)
            powers.append(nxt)
            if len(powers) > alg.dim + 1:
                raise K0Error("minimal polynomial search exceeded dimension bound")

    def _coprime_parts(g):
        return [(f, m) for f, m in _factor_squarefree_parts(g, p)]

    def _crt_idempotents(e, x, g, parts):
        out = []
        for f, mult in parts:
            qi = f
            for _ in range(mult - 1):
                qi = _poly_mul(qi, f, p)
            rest, _ = _poly_divmod(g, qi, p)
            gcd, s, _t = _poly_xgcd(rest, qi, p)
            if len(gcd) != 1:
                raise K0Error("factor parts are not coprime")
            h = _poly_mul(s, rest, p)  # h == 1 mod qi, 0 mod rest
            out.append(_eval_poly_in_algebra(alg, e, x, h))
        return out

    unit = list(alg.unit)
    result = split(unit, corner_basis(unit))
    _check_idempotent_system(alg, result, j_basis)
    return result


def _candidate_stream(candidates, basis, rng: random.Random, p: int):
    for c in candidates:
        yield c
    while True:
        yield [
            sum(rng.randrange(p) * b[i] for b in basis) % p
            for i in range(len(basis[0]))
        ]


def _check_idempotent_system(alg: ModPAlgebra, idems, j_basis):
    p = alg.p
    total = [0] * alg.dim
    for e in idems:
        sq = alg.multiply(e, e)
        diff = [(a - b) % p for a, b in zip(sq, e)]
        if any(diff) and (_gauss_coords(j_basis, [diff], p)[0] is None if j_basis else True):
            raise K0Error("non-idempotent element in splitting system")
        total = [(a + b) % p for a, b in zip(total, e)]
    diff = [(a - b) % p for a, b in zip(total, alg.unit)]
    if any(diff) and (_gauss_coords(j_basis, [diff], p)[0] is None if j_basis else True):
        raise K0Error("idempotent system does not sum to the unit mod J")


# ---------------------------------------------------------------------------
# idempotent lifting and completed decomposition


def _lift_idempotents_mod_pk(end: EndRing, idems_modp: list[list[int]], p: int, k: int) -> list[list[int]]:
    """Lift a complete orthogonal system mod (p, J) to one mod p^k.

    Arithmetic happens in coefficient space over the End structure constants,
    so membership in End is automatic; Newton e <- 3e^2 - 2e^3 converges
    because the initial error lies in the nilpotent-plus-p ideal.
    """
    alg = end.algebra
    mod = p**k
    if alg.den % p == 0:
        raise K0Error("End denominator not a unit at p")
    den_inv = pow(alg.den, -1, mod)

    def mul(x, y):
        out = [0] * alg.rank
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj:
                    continue
                f = (xi * yj) % mod
                c = alg.constants[i][j]
                for t in range(alg.rank):
                    if c[t]:
                        out[t] = (out[t] + f * c[t] * den_inv) % mod
        return out

    unit = []
    for u in alg.unit:
        unit.append(u.numerator * pow(u.denominator, -1, mod) % mod)

    def newton(e):
        for _ in range(64):
            sq = mul(e, e)
            if sq == e:
                return e
            cube = mul(sq, e)
            e = [(3 * a - 2 * b) % mod for a, b in zip(sq, cube)]
        raise UnstableDecompositionError("idempotent lifting did not converge")

    lifted: list[list[int]] = []
    used = [0] * alg.rank
    for raw in idems_modp[:-1]:
        e = [x % mod for x in raw]
        co = [(u - f) % mod for u, f in zip(unit, used)]  # 1 - sum(previous)
        e = mul(mul(co, e), co)
        e = newton(e)
        lifted.append(e)
        used = [(a + b) % mod for a, b in zip(used, e)]
    last = [(u - f) % mod for u, f in zip(unit, used)]
    lifted.append(last)
    for i, e in enumerate(lifted):
        if mul(e, e) != e:
            raise UnstableDecompositionError("lifted element is not idempotent mod p^k")
        for j in range(i):
            if any(mul(e, lifted[j])) or any(mul(lifted[j], e)):
                raise UnstableDecompositionError("lifted idempotents are not orthogonal")
    return lifted


@dataclass
class LocalSummand:
    """One indecomposable piece of a completed module at precision p^k.

    The carrier columns are an actual sublattice of the parent module (exact
    integer vectors); the algebra action on them is certified modulo p^k.
    """

    p: int
    k: int
    rank: int
    basis_in_parent: IntMatrix
    action: list[ModPMatrix]
    parent_name: str = ""

    def fingerprint(self, k_ref: int | None = None) -> tuple:
        k_ref = min(k_ref or self.k, self.k)
        mod = self.p**k_ref
        polys = []
        for m in self.action:
            cp = m.lift().charpoly()
            polys.append(tuple(c % mod for c in cp))
        return (self.rank, tuple(polys))

    def reduce(self, k2: int) -> "LocalSummand":
        if k2 > self.k:
            raise K0Error("cannot raise precision by reduction")
        return LocalSummand(
            self.p, k2, self.rank, self.basis_in_parent,
            [m.reduce(k2) for m in self.action], self.parent_name,
        )


@dataclass
class DecompositionCertificate:
    """Stability record for a completed decomposition."""

    summands: list[tuple[int, str, int]]  # (rank, fingerprint, multiplicity)
    precision: int
    stable: bool
    rounds: int


def _decompose_at_precision(module: LatticeModule, k: int, rng: random.Random,
                            end: EndRing | None = None) -> list[LocalSummand]:
    p = module.base.prime
    end = end or end_ring(module.algebra, module)
    modp = ModPAlgebra.from_algebra(end.algebra, p)
    jbasis = radical_mod_p(modp)
    prims = primitive_idempotents(modp, jbasis, rng)
    lifted = _lift_idempotents_mod_pk(end, prims, p, k)
    mod = p**k
    act_mod = module.carrier_action_mod(p, k)
    summands = []
    total_rank = 0
    for coeffs in lifted:
        e_mat = end.matrix_of(coeffs)
        e_mat = IntMatrix(e_mat.rows, e_mat.cols, [[x % mod for x in r] for r in e_mat.data])
        cols = _independent_columns_mod_p(e_mat, p)
        r_t = len(cols)
        if r_t == 0:
            raise UnstableDecompositionError("idempotent with zero rank mod p")
        w = IntMatrix.from_cols([e_mat.col(j) for j in cols], rows=module.rank)
        action = _summand_action(w, act_mod, p, k)
        summands.append(LocalSummand(p, k, r_t, w, action, module.name))
        total_rank += r_t
    if total_rank != module.rank:
        raise UnstableDecompositionError("summand ranks do not add up to the module rank")
    assembled = summands[0].basis_in_parent
    for s in summands[1:]:
        assembled = assembled.hstack(s.basis_in_parent)
    if det_mod_p(assembled.data, p) == 0:
        raise UnstableDecompositionError("assembled summand inclusions are not invertible mod p")
    return summands


def _independent_columns_mod_p(m: IntMatrix, p: int) -> list[int]:
    rows = [[x % p for x in r] for r in m.data]
    chosen: list[int] = []
    mat: list[list[int]] = []
    for j in range(m.cols):
        col = [rows[i][j] for i in range(m.rows)]
        red = list(col)
        for b in mat:
            piv = next(i for i, x in enumerate(b) if x)
            if red[piv]:
                f = (red[piv] * pow(b[piv], -1, p)) % p
                red = [(x - f * y) % p for x, y in zip(red, b)]
        if any(red):
            mat.append(red)
            chosen.append(j)
    return chosen


def _summand_action(w: IntMatrix, act_mod: list[ModPMatrix], p: int, k: int) -> list[ModPMatrix]:
    mod = p**k
    rows = _independent_rows_mod_p(w, p)
    sub = IntMatrix.from_rows([w.data[i] for i in rows])
    sub_inv = ModPMatrix.from_int(sub, p, k).inverse()
    out = []
    wm = ModPMatrix.from_int(w, p, k)
    for a in act_mod:
        aw = a * wm
        aw_rows = ModPMatrix(mod, p, k, len(rows), w.cols, [aw.data[i] for i in rows])
        beta = sub_inv * aw_rows
        if (wm * beta) != aw:
            raise UnstableDecompositionError("summand action inconsistent at this precision")
        out.append(beta)
    return out


def _independent_rows_mod_p(m: IntMatrix, p: int) -> list[int]:
    return _independent_columns_mod_p(m.transpose(), p)


def decompose_local(module: LatticeModule, k0: int = DEFAULT_PRECISION,
                    rng: random.Random | None = None,
                    max_k: int = MAX_PRECISION) -> tuple[list[LocalSummand], DecompositionCertificate]:
    """Indecomposable summands of the completed module, precision-certified.

    Runs at k0, doubles the precision until two consecutive rounds agree on
    the fingerprint multiset (ranks and reduced characteristic polynomials),
    and returns the finer round. Direct sums decompose blockwise.
    """
    if not module.base.is_local:
        raise K0Error("decompose_local needs a module over a local base")
    rng = rng or random.Random(0)
    if module.blocks:
        return _decompose_blocks(module, k0, rng, max_k)
    end = end_ring(module.algebra, module)
    rounds = []
    k = k0
    n_rounds = 0
    prev = None
    while k <= max_k:
        summands = _decompose_at_precision(module, k, rng, end=end)
        fp = sorted(str(s.fingerprint(k0)) for s in summands)
        n_rounds += 1
        if prev is not None and prev[0] == fp:
            groups = _group_summands(summands, rng)
            cert = DecompositionCertificate(groups, k, True, n_rounds)
            return summands, cert
        prev = (fp, summands)
        rounds.append(fp)
        k *= 2
    cert = DecompositionCertificate(
        _group_summands(prev[1], rng), k // 2, False, n_rounds
    )
    raise UnstableDecompositionError(
        f"decomposition did not stabilize below precision {max_k}", partial=(prev[1], cert)
    )


def _decompose_blocks(module, k0, rng, max_k):
    all_summands = []
    stable = True
    precision = None
    rounds = 0
    for leaf, _ in module.leaf_blocks():
        summands, cert = decompose_local(leaf, k0, rng, max_k)
        all_summands.extend(summands)
        stable = stable and cert.stable
        precision = cert.precision if precision is None else min(precision, cert.precision)
        rounds = max(rounds, cert.rounds)
    k_min = precision
    all_summands = [s.reduce(k_min) if s.k > k_min else s for s in all_summands]
    cert = DecompositionCertificate(_group_summands(all_summands, rng), k_min, stable, rounds)
    return all_summands, cert


def _group_summands(summands: list[LocalSummand], rng) -> list[tuple[int, str, int]]:
    classes: list[tuple[LocalSummand, int]] = []
    for s in summands:
        placed = False
        for idx, (rep, count) in enumerate(classes):
            if s.rank == rep.rank and iso_summands(rep, s, rng) == "iso":
                classes[idx] = (rep, count + 1)
                placed = True
                break
        if not placed:
            classes.append((s, 1))
    out = []
    for rep, count in classes:
        out.append((rep.rank, str(rep.fingerprint(min(rep.k, DEFAULT_PRECISION))), count))
    return sorted(out)


# ---------------------------------------------------------------------------
# hom and iso at finite precision (summand level)


def hom_summands_mod(x: LocalSummand, y: LocalSummand) -> tuple[list[list[int]], int]:
    """Generators of Hom(x, y) mod p^k; returns (vectorized gens, free rank)."""
    if x.p != y.p:
        raise K0Error("summands at different primes")
    k = min(x.k, y.k)
    xr, yr = x.reduce(k) if x.k > k else x, y.reduce(k) if y.k > k else y
    sys_rows = []
    rs, rt = xr.rank, yr.rank
    for ai, bi in zip(xr.action, yr.action):
        a_l = ai.lift()
        b_l = bi.lift()
        for a in range(rt):
            for b in range(rs):
                row = [0] * (rt * rs)
                for c in range(rs):
                    row[a * rs + c] += a_l.data[c][b]
                for c in range(rt):
                    row[c * rs + b] -= b_l.data[a][c]
                sys_rows.append(row)
    system = IntMatrix.from_rows(sys_rows) if sys_rows else IntMatrix.zeros(0, rt * rs)
    gens = kernel_mod_prime_power(system, x.p, k)
    free = sum(1 for _, e in gens if e == k)
    return [v for v, _ in gens], free


def summand_end_algebra_mod_p(s: LocalSummand) -> tuple[ModPAlgebra, list[list[int]]]:
    """End(s) mod p as an F_p-algebra, from the free part of End mod p^k.

    Only the free generators survive reduction mod p; their span is the image
    of the completed endomorphism ring at this precision. Closure failures
    mean the precision is too low and raise InconclusiveError.
    """
    p = s.p
    gens, _ = hom_summands_mod(s, s)
    reduced = []
    for v in gens:
        w = [x % p for x in v]
        if any(w):
            reduced.append(w)
    basis = _span_basis(reduced, p)
    if not basis:
        raise InconclusiveError("endomorphism image mod p is zero")
    r = s.rank

    def matmul_vec(a, b):
        out = [0] * (r * r)
        for i in range(r):
            for t in range(r):
                x = a[i * r + t]
                if x:
                    for j in range(r):
                        out[i * r + j] = (out[i * r + j] + x * b[t * r + j]) % p
        return out

    dim = len(basis)
    constants = [[[0] * dim for _ in range(dim)] for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            prod = matmul_vec(basis[i], basis[j])
            coords = _gauss_coords(basis, [prod], p)[0]
            if coords is None:
                raise InconclusiveError("endomorphism image mod p is not closed; raise precision")
            for t, c in enumerate(coords):
                constants[i][j][t] = c
    ident = [1 if (t // r) == (t % r) else 0 for t in range(r * r)]
    unit = _gauss_coords(basis, [ident], p)[0]
    if unit is None:
        raise InconclusiveError("identity missing from endomorphism image mod p")
    return ModPAlgebra(p, dim, constants, unit), basis


def summand_indecomposable(s: LocalSummand, rng: random.Random) -> bool:
    """Re-decomposition check: a summand is final iff its End splits trivially."""
    alg, _ = summand_end_algebra_mod_p(s)
    jbasis = radical_mod_p(alg)
    prims = primitive_idempotents(alg, jbasis, rng)
    return len(prims) == 1


def iso_summands(x: LocalSummand, y: LocalSummand, rng: random.Random) -> str:
    """'iso' / 'noniso' / 'inconclusive' for completed summands mod p^k."""
    if x.rank != y.rank:
        return "noniso"
    p = x.p
    gens, _free = hom_summands_mod(x, y)
    mats = []
    for v in gens:
        m = [[v[a * x.rank + b] % p for b in range(x.rank)] for a in range(y.rank)]
        if any(any(r) for r in m):
            mats.append(m)
    if not mats:
        return "noniso"
    found = _search_unit_combination(mats, p, x.rank, rng)
    if found is not None:
        return "iso"
    if p ** len(mats) <= DETERMINISTIC_SEARCH_BOUND:
        return "noniso"
    return "inconclusive"


def _search_unit_combination(mats: list[list[list[int]]], p: int, size: int,
                             rng: random.Random,
                             trials: int = RANDOM_SEARCH_TRIALS) -> list[int] | None:
    """Find lambda with det(sum lambda_i mats_i) != 0 mod p, or None.

    Deterministic full enumeration when p^len(mats) is small; the None answer
    is then a proof. Otherwise seeded random trials (None = gave up).
    """
    m = len(mats)
    if m == 0:
        return None

    def det_of(lam):
        acc = [[0] * size for _ in range(size)]
        for c, mat in zip(lam, mats):
            if c:
                for i in range(size):
                    row = mat[i]
                    arow = acc[i]
                    for j in range(size):
                        arow[j] = (arow[j] + c * row[j]) % p
        return det_mod_p(acc, p)

    if p**m <= DETERMINISTIC_SEARCH_BOUND:
        lam = [0] * m
        while True:
            if any(lam) and det_of(lam) != 0:
                return list(lam)
            i = 0
            while i < m:
                lam[i] += 1
                if lam[i] < p:
                    break
                lam[i] = 0
                i += 1
            if i == m:
                return None
    for _ in range(trials):
        lam = [rng.randrange(p) for _ in range(m)]
        if any(lam) and det_of(lam) != 0:
            return lam
    return None


# ---------------------------------------------------------------------------
# local isomorphism of honest lattice modules


@dataclass
class IsoResult:
    verdict: str  # "iso" | "noniso" | "inconclusive"
    witness: IntMatrix | None = None
    invariant: str = ""

    @property
    def is_iso(self) -> bool:
        return self.verdict == "iso"


def iso_local(m: LatticeModule, n: LatticeModule, p: int,
              rng: random.Random | None = None,
              trials: int = RANDOM_SEARCH_TRIALS) -> IsoResult:
    """Decide M_p ~ N_p with an exact witness or a distinguishing invariant.

    A returned witness is an exact module homomorphism (integer matrix in
    carrier coordinates) whose determinant is a p-unit, hence an isomorphism
    over Z_(p) at every precision. A 'noniso' verdict is only produced from
    exhausted deterministic search or a rank mismatch, never from sampling.
    """
    rng = rng or random.Random(0)
    if not m.algebra.same_algebra(n.algebra):
        raise K0Error("iso_local between modules over different algebras")
    ml = m.localize(p)
    nl = n.localize(p)
    if ml.rank != nl.rank:
        return IsoResult("noniso", invariant=f"rank {ml.rank} vs {nl.rank}")
    if ml.rank == 0:
        return IsoResult("iso", witness=IntMatrix.identity(0))
    hom = hom_lattice(ml.algebra, ml, nl)
    if hom.rank == 0:
        return IsoResult("noniso", invariant="Hom lattice is zero")
    mats = []
    keep = []
    for b in hom.basis:
        red = [[x % p for x in row] for row in b.data]
        if any(any(r) for r in red):
            mats.append(red)
            keep.append(b)
    if not mats:
        return IsoResult("noniso", invariant="all homomorphisms vanish mod p")
    lam = _search_unit_combination(mats, p, ml.rank, rng, trials)
    if lam is not None:
        witness = IntMatrix.zeros(nl.rank, ml.rank)
        for c, b in zip(lam, keep):
            if c:
                witness = witness + b * c
        d = witness.det()
        if d == 0 or d % p == 0:
            raise K0Error("unit search returned a non-unit witness")
        return IsoResult("iso", witness=witness)
    if p ** len(mats) <= DETERMINISTIC_SEARCH_BOUND:
        return IsoResult("noniso", invariant="no unit in Hom mod p (exhaustive search)")
    return IsoResult("inconclusive", invariant="randomized unit search exhausted")


def witness_inverse(m: LatticeModule, witness: IntMatrix) -> RatMatrix:
    """Exact inverse of an iso witness; p-integral whenever det is a p-unit."""
    inv = witness.to_rational().inverse()
    return inv


def is_indecomposable_summandwise(mu_vectors: list[dict], reference_mu: dict,
                                  block_of: dict) -> bool:
    """Structural indecomposability from completed summand classes.

    A direct summand would carry a rational form, so its rational-content
    vector must be an integer multiple of the reference pattern within each
    rational block. If no proper nonempty sub-multiset of summands satisfies
    that, the module is indecomposable. Sound in this direction only.
    mu_vectors: per summand {class: count}; reference_mu: class -> mu(U);
    block_of: class -> rational block id.
    """
    t = len(mu_vectors)
    if t <= 1:
        return True
    keys = sorted(reference_mu)
    blocks = sorted({block_of[u] for u in keys})
    for mask in range(1, 2**t - 1):
        total = {u: 0 for u in keys}
        for i in range(t):
            if mask & (1 << i):
                for u, c in mu_vectors[i].items():
                    total[u] = total.get(u, 0) + c
        ok = True
        for w in blocks:
            lam = None
            for u in keys:
                if block_of[u] != w:
                    continue
                mu_u = reference_mu[u]
                if total.get(u, 0) % mu_u != 0:
                    ok = False
                    break
                q = total.get(u, 0) // mu_u
                if lam is None:
                    lam = q
                elif lam != q:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return False
    return True

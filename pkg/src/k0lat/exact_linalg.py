"""Exact integer/rational matrix kernel.

Hermite and Smith normal forms with transformation matrices, integer linear
solving, rational Gauss elimination, and linear algebra modulo prime powers.
All integer arithmetic uses Python's arbitrary-precision ints; rational
entries are ``fractions.Fraction`` (always in lowest terms, positive
denominator).

Conventions fixed here and relied on everywhere else:

* ``hnf`` is column-style and lower-triangular: ``H = M @ U`` with ``U``
  unimodular, pivots positive, entries left of a pivot in its row reduced
  into ``[0, pivot)``, zero columns trailing.
* ``snf`` returns ``(D, U, V)`` with ``D = U @ M @ V`` diagonal and
  ``d1 | d2 | ... | dr``, all positive, zeros trailing.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DimensionError


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and x*a + y*b = g."""
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        g, x, y = -g, -x, -y
    return g, x, y


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero is infinite")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def prime_to_p_part(n: int, p: int) -> int:
    """Largest divisor of |n| coprime to p."""
    n = abs(n)
    while n % p == 0:
        n //= p
    return n


def is_prime(n: int) -> bool:
    """Trial-division primality test; inputs here are desk-scale."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| by trial division."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor zero")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class IntMatrix:
    """Dense integer matrix, row-major, arbitrary precision."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list[list[int]]):
        if len(data) != rows or any(len(r) != cols for r in data):
            raise DimensionError(f"expected {rows}x{cols} data")
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def from_rows(cls, data: list[list[int]]) -> "IntMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        return cls(rows, cols, [list(r) for r in data])

    @classmethod
    def from_cols(cls, cols_list: list[list[int]], rows: int | None = None) -> "IntMatrix":
        if not cols_list:
            if rows is None:
                raise DimensionError("need row count for empty column list")
            return cls(rows, 0, [[] for _ in range(rows)])
        n = len(cols_list[0])
        return cls(n, len(cols_list), [[c[i] for c in cols_list] for i in range(n)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [list(r) for r in self.data])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(r) for r in self.data)))

    def __repr__(self) -> str:
        return f"IntMatrix({self.data!r})"

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionError("shape mismatch in addition")
        return IntMatrix(
            self.rows,
            self.cols,
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
        )

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [[-a for a in r] for r in self.data])

    def __mul__(self, other):
        if isinstance(other, int):
            return IntMatrix(self.rows, self.cols, [[a * other for a in r] for r in self.data])
        if isinstance(other, IntMatrix):
            if self.cols != other.rows:
                raise DimensionError("shape mismatch in product")
            ot = other.data
            out = []
            for r in self.data:
                row = [0] * other.cols
                for k, a in enumerate(r):
                    if a:
                        ok = ot[k]
                        for j in range(other.cols):
                            row[j] += a * ok[j]
                out.append(row)
            return IntMatrix(self.rows, other.cols, out)
        return NotImplemented

    __rmul__ = __mul__

    def mul_vec(self, v: list[int]) -> list[int]:
        if len(v) != self.cols:
            raise DimensionError("vector length mismatch")
        return [sum(a * x for a, x in zip(r, v)) for r in self.data]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, [list(c) for c in zip(*self.data)] if self.rows else [[] for _ in range(self.cols)])

    def col(self, j: int) -> list[int]:
        return [self.data[i][j] for i in range(self.rows)]

    def columns(self) -> list[list[int]]:
        return [self.col(j) for j in range(self.cols)]

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise DimensionError("row mismatch in hstack")
        return IntMatrix(self.rows, self.cols + other.cols, [ra + rb for ra, rb in zip(self.data, other.data)])

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.data for a in r)

    def content(self) -> int:
        """gcd of all entries (0 for the zero matrix)."""
        g = 0
        for r in self.data:
            for a in r:
                g = xgcd(g, a)[0]
                if g == 1:
                    return 1
        return g

    def to_rational(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, [[Fraction(a) for a in r] for r in self.data])

    def det(self) -> int:
        """Determinant via fraction-free Bareiss elimination."""
        if self.rows != self.cols:
            raise DimensionError("determinant of non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        m = [list(r) for r in self.data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for i in range(k + 1, n):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
                m[i][k] = 0
            prev = m[k][k]
        return sign * m[n - 1][n - 1]

    def rank(self) -> int:
        return len(snf_diagonal(self))

    def charpoly(self) -> list[int]:
        """Characteristic polynomial det(xI - A), coefficients from x^n down to x^0."""
        if self.rows != self.cols:
            raise DimensionError("charpoly of non-square matrix")
        # Faddeev-LeVerrier over exact rationals; result is integral.
        n = self.rows
        a = self.to_rational()
        coeffs = [Fraction(1)]
        m = RatMatrix.identity(n)
        for k in range(1, n + 1):
            m = a * m
            c = -m.trace() / k
            coeffs.append(c)
            if k < n:
                m = m + RatMatrix.identity(n) * c
        out = []
        for c in coeffs:
            if c.denominator != 1:
                raise ArithmeticError("characteristic polynomial must be integral")
            out.append(int(c))
        return out


class RatMatrix:
    """Dense matrix over Q; entries are Fractions in lowest terms."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list[list[Fraction]]):
        if len(data) != rows or any(len(r) != cols for r in data):
            raise DimensionError(f"expected {rows}x{cols} data")
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def from_rows(cls, data) -> "RatMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        return cls(rows, cols, [[Fraction(a) for a in r] for r in data])

    @classmethod
    def from_cols(cls, cols_list, rows: int | None = None) -> "RatMatrix":
        if not cols_list:
            if rows is None:
                raise DimensionError("need row count for empty column list")
            return cls(rows, 0, [[] for _ in range(rows)])
        n = len(cols_list[0])
        return cls(n, len(cols_list), [[Fraction(c[i]) for c in cols_list] for i in range(n)])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)])

    def copy(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, [list(r) for r in self.data])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(r) for r in self.data)))

    def __repr__(self) -> str:
        return f"RatMatrix({self.data!r})"

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionError("shape mismatch in addition")
        return RatMatrix(
            self.rows,
            self.cols,
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (other * Fraction(-1))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return RatMatrix(self.rows, self.cols, [[a * q for a in r] for r in self.data])
        if isinstance(other, RatMatrix):
            if self.cols != other.rows:
                raise DimensionError("shape mismatch in product")
            ot = other.data
            out = []
            for r in self.data:
                row = [Fraction(0)] * other.cols
                for k, a in enumerate(r):
                    if a:
                        ok = ot[k]
                        for j in range(other.cols):
                            row[j] += a * ok[j]
                out.append(row)
            return RatMatrix(self.rows, other.cols, out)
        if isinstance(other, IntMatrix):
            return self * other.to_rational()
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        if isinstance(other, IntMatrix):
            return other.to_rational() * self
        return NotImplemented

    def mul_vec(self, v) -> list[Fraction]:
        if len(v) != self.cols:
            raise DimensionError("vector length mismatch")
        return [sum((a * Fraction(x) for a, x in zip(r, v)), Fraction(0)) for r in self.data]

    def transpose(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows, [list(c) for c in zip(*self.data)] if self.rows else [[] for _ in range(self.cols)])

    def col(self, j: int) -> list[Fraction]:
        return [self.data[i][j] for i in range(self.rows)]

    def columns(self) -> list[list[Fraction]]:
        return [self.col(j) for j in range(self.cols)]

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise DimensionError("trace of non-square matrix")
        return sum((self.data[i][i] for i in range(self.rows)), Fraction(0))

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.data for a in r)

    def denominator_lcm(self) -> int:
        d = 1
        for r in self.data:
            for a in r:
                d = d * a.denominator // xgcd(d, a.denominator)[0]
        return d

    def scaled_integer(self) -> tuple[IntMatrix, int]:
        """Return (d * self as IntMatrix, d) with d the lcm of denominators."""
        d = self.denominator_lcm()
        return IntMatrix(self.rows, self.cols, [[int(a * d) for a in r] for r in self.data]), d

    def rank(self) -> int:
        m = [list(r) for r in self.data]
        rank = 0
        for j in range(self.cols):
            piv = None
            for i in range(rank, self.rows):
                if m[i][j] != 0:
                    piv = i
                    break
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            inv = 1 / m[rank][j]
            m[rank] = [a * inv for a in m[rank]]
            for i in range(self.rows):
                if i != rank and m[i][j] != 0:
                    f = m[i][j]
                    m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
            rank += 1
            if rank == self.rows:
                break
        return rank

    def inverse(self) -> "RatMatrix":
        if self.rows != self.cols:
            raise DimensionError("inverse of non-square matrix")
        n = self.rows
        m = [list(r) + [Fraction(1 if i == j else 0) for j in range(n)] for i, r in enumerate(self.data)]
        for j in range(n):
            piv = None
            for i in range(j, n):
                if m[i][j] != 0:
                    piv = i
                    break
            if piv is None:
                raise ZeroDivisionError("matrix is singular")
            m[j], m[piv] = m[piv], m[j]
            inv = 1 / m[j][j]
            m[j] = [a * inv for a in m[j]]
            for i in range(n):
                if i != j and m[i][j] != 0:
                    f = m[i][j]
                    m[i] = [a - f * b for a, b in zip(m[i], m[j])]
        return RatMatrix(n, n, [r[n:] for r in m])

    def solve(self, rhs: "RatMatrix") -> "RatMatrix | None":
        """One solution of self @ X = rhs over Q, or None if inconsistent."""
        if rhs.rows != self.rows:
            raise DimensionError("rhs row mismatch")
        n, c = self.cols, rhs.cols
        m = [list(r) + list(rr) for r, rr in zip(self.data, rhs.data)]
        pivots = []
        rank = 0
        for j in range(n):
            piv = None
            for i in range(rank, self.rows):
                if m[i][j] != 0:
                    piv = i
                    break
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            inv = 1 / m[rank][j]
            m[rank] = [a * inv for a in m[rank]]
            for i in range(self.rows):
                if i != rank and m[i][j] != 0:
                    f = m[i][j]
                    m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
            pivots.append(j)
            rank += 1
        for i in range(rank, self.rows):
            if any(m[i][n + t] != 0 for t in range(c)):
                return None
        x = [[Fraction(0)] * c for _ in range(n)]
        for i, j in enumerate(pivots):
            for t in range(c):
                x[j][t] = m[i][n + t]
        return RatMatrix(n, c, x)

    def kernel(self) -> list[list[Fraction]]:
        """Basis of the right kernel over Q."""
        n = self.cols
        m = [list(r) for r in self.data]
        pivots: list[int] = []
        rank = 0
        for j in range(n):
            piv = None
            for i in range(rank, self.rows):
                if m[i][j] != 0:
                    piv = i
                    break
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            inv = 1 / m[rank][j]
            m[rank] = [a * inv for a in m[rank]]
            for i in range(self.rows):
                if i != rank and m[i][j] != 0:
                    f = m[i][j]
                    m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
            pivots.append(j)
            rank += 1
        free = [j for j in range(n) if j not in pivots]
        basis = []
        for f in free:
            v = [Fraction(0)] * n
            v[f] = Fraction(1)
            for i, j in enumerate(pivots):
                v[j] = -m[i][f]
            basis.append(v)
        return basis


def _col_axpy(m: list[list[int]], src: int, dst: int, q: int) -> None:
    if q == 0:
        return
    for row in m:
        row[dst] += q * row[src]


def _col_combine(m: list[list[int]], j1: int, j2: int, a: int, b: int, c: int, d: int) -> None:
    """(col j1, col j2) <- (a*col j1 + b*col j2, c*col j1 + d*col j2)."""
    for row in m:
        x, y = row[j1], row[j2]
        row[j1] = a * x + b * y
        row[j2] = c * x + d * y


def hnf(m: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Column-style lower-triangular Hermite form.

    Returns (H, U) with H = m @ U, U unimodular, positive pivots, entries to
    the left of each pivot reduced into [0, pivot), zero columns trailing.
    """
    h = [list(r) for r in m.data]
    u = [[1 if i == j else 0 for j in range(m.cols)] for i in range(m.cols)]
    c = 0
    for i in range(m.rows):
        if c == m.cols:
            break
        # gcd-eliminate row i across columns >= c
        j0 = None
        for j in range(c, m.cols):
            if h[i][j] != 0:
                j0 = j
                break
        if j0 is None:
            continue
        if j0 != c:
            for row in h:
                row[c], row[j0] = row[j0], row[c]
            for row in u:
                row[c], row[j0] = row[j0], row[c]
        for j in range(c + 1, m.cols):
            if h[i][j] == 0:
                continue
            a, b = h[i][c], h[i][j]
            g, s, t = xgcd(a, b)
            # (col_c, col_j) <- (s*col_c + t*col_j, -(b/g)*col_c + (a/g)*col_j), det 1
            _col_combine(h, c, j, s, t, -(b // g), a // g)
            _col_combine(u, c, j, s, t, -(b // g), a // g)
        if h[i][c] < 0:
            for row in h:
                row[c] = -row[c]
            for row in u:
                row[c] = -row[c]
        piv = h[i][c]
        for j in range(c):
            q = h[i][j] // piv
            _col_axpy(h, c, j, -q)
            _col_axpy(u, c, j, -q)
        c += 1
    return IntMatrix(m.rows, m.cols, h), IntMatrix(m.cols, m.cols, u)


def _snf_min_pivot(a, t, rows, cols):
    best = None
    for i in range(t, rows):
        for j in range(t, cols):
            v = a[i][j]
            if v != 0 and (best is None or abs(v) < abs(best[2])):
                best = (i, j, v)
    return best


def snf(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: (D, U, V) with D = U @ m @ V, d1 | d2 | ... > 0."""
    rows, cols = m.rows, m.cols
    a = [list(r) for r in m.data]
    u = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def row_axpy(i_src, i_dst, q):
        if q == 0:
            return
        a[i_dst] = [x + q * y for x, y in zip(a[i_dst], a[i_src])]
        u[i_dst] = [x + q * y for x, y in zip(u[i_dst], u[i_src])]

    def row_combine(i1, i2, p, q, r, s):
        a[i1], a[i2] = (
            [p * x + q * y for x, y in zip(a[i1], a[i2])],
            [r * x + s * y for x, y in zip(a[i1], a[i2])],
        )
        u[i1], u[i2] = (
            [p * x + q * y for x, y in zip(u[i1], u[i2])],
            [r * x + s * y for x, y in zip(u[i1], u[i2])],
        )

    t = 0
    while True:
        piv = _snf_min_pivot(a, t, rows, cols)
        if piv is None:
            break
        pi, pj, _ = piv
        if pi != t:
            a[t], a[pi] = a[pi], a[t]
            u[t], u[pi] = u[pi], u[t]
        if pj != t:
            for row in a:
                row[t], row[pj] = row[pj], row[t]
            for row in v:
                row[t], row[pj] = row[pj], row[t]
        while True:
            # clear column t with row ops
            for i in range(t + 1, rows):
                if a[i][t] == 0:
                    continue
                x, y = a[t][t], a[i][t]
                if y % x == 0:
                    row_axpy(t, i, -(y // x))
                else:
                    g, s_, t_ = xgcd(x, y)
                    row_combine(t, i, s_, t_, -(y // g), x // g)
            # clear row t with column ops
            dirty = False
            for j in range(t + 1, cols):
                if a[t][j] == 0:
                    continue
                x, y = a[t][t], a[t][j]
                if y % x == 0:
                    _col_axpy(a, t, j, -(y // x))
                    _col_axpy(v, t, j, -(y // x))
                else:
                    g, s_, t_ = xgcd(x, y)
                    _col_combine(a, t, j, s_, t_, -(y // g), x // g)
                    _col_combine(v, t, j, s_, t_, -(y // g), x // g)
                    dirty = True
            if not dirty and all(a[i][t] == 0 for i in range(t + 1, rows)):
                break
        # divisibility sweep: pull any non-multiple into column t and redo
        d = a[t][t]
        offender = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % d != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_axpy(offender, t, 1)
            continue
        t += 1
        if t == rows or t == cols:
            break
    for i in range(min(rows, cols)):
        if a[i][i] < 0:
            a[i] = [-x for x in a[i]]
            u[i] = [-x for x in u[i]]
    return (
        IntMatrix(rows, cols, a),
        IntMatrix(rows, rows, u),
        IntMatrix(cols, cols, v),
    )


def snf_diagonal(m: IntMatrix) -> list[int]:
    """Positive invariant factors of m (no transforms, trailing zeros dropped)."""
    d, _, _ = snf(m)
    out = []
    for i in range(min(m.rows, m.cols)):
        if d.data[i][i] != 0:
            out.append(d.data[i][i])
    return out


def _hnf_pivots(h: IntMatrix) -> list[tuple[int, int]]:
    """(pivot_row, col) pairs of a column-style HNF, in column order."""
    pivots = []
    for j in range(h.cols):
        col = h.col(j)
        nz = [i for i, x in enumerate(col) if x != 0]
        if nz:
            pivots.append((nz[0], j))
    return pivots


def _hnf_substitute(h: IntMatrix, pivots, b: list[int]) -> list[int] | None:
    """Solve h @ y = b by forward substitution on pivot rows (integer only)."""
    residual = list(b)
    y = [0] * h.cols
    for r, j in pivots:
        piv = h.data[r][j]
        if residual[r] % piv != 0:
            return None
        q = residual[r] // piv
        y[j] = q
        if q:
            for i in range(r, h.rows):
                residual[i] -= q * h.data[i][j]
    if any(residual):
        return None
    return y


def integer_kernel(a: IntMatrix) -> list[list[int]]:
    """Z-basis of the right kernel {x : a @ x = 0}, HNF-canonical.

    Computes the rational kernel by Gauss elimination, clears denominators
    into primitive integer vectors, and saturates prime by prime (only primes
    of the cleared denominators can divide the index). Avoids unimodular
    transform matrices entirely, whose entries explode on larger systems.
    """
    if a.cols == 0:
        return []
    rational = a.to_rational().kernel()
    if not rational:
        return []
    cols = []
    candidate_primes: set[int] = set()
    for v in rational:
        d = 1
        for x in v:
            d = d * x.denominator // xgcd(d, x.denominator)[0]
        if d > 1:
            candidate_primes.update(factorize(d))
        w = [int(x * d) for x in v]
        g = 0
        for x in w:
            g = xgcd(g, x)[0]
        if g > 1:
            w = [x // g for x in w]
        cols.append(w)
    k, _ = hnf(IntMatrix.from_cols(cols, rows=a.cols))
    k = IntMatrix.from_cols(
        [c for c in k.columns() if any(x != 0 for x in c)], rows=a.cols
    )
    m = k.cols
    for p in sorted(candidate_primes):
        while True:
            null = nullspace_mod_p(k.data, p)
            if not null:
                break
            w = null[0]
            u = [x // p for x in k.mul_vec(w)]
            k, _ = hnf(k.hstack(IntMatrix.from_cols([u], rows=a.cols)))
            k = IntMatrix.from_cols(
                [c for c in k.columns() if any(x != 0 for x in c)], rows=a.cols
            )
            if k.cols != m:
                raise ArithmeticError("saturation changed the kernel rank")
    return k.columns()


def solve_integer(a: IntMatrix, b: list[int]) -> tuple[list[int], list[list[int]]] | None:
    """Solve a @ x = b over Z.

    Returns (x, kernel_basis) or None when no integer solution exists.
    """
    if len(b) != a.rows:
        raise DimensionError("rhs length mismatch")
    h, u = hnf(a)
    pivots = _hnf_pivots(h)
    y = _hnf_substitute(h, pivots, b)
    if y is None:
        return None
    x = u.mul_vec(y)
    return x, integer_kernel(a)


def solve_integer_matrix(a: IntMatrix, b: IntMatrix) -> IntMatrix | None:
    """Solve a @ X = b over Z; one HNF factorization for all columns."""
    if a.rows != b.rows:
        raise DimensionError("rhs row mismatch")
    h, u = hnf(a)
    pivots = _hnf_pivots(h)
    cols = []
    for j in range(b.cols):
        y = _hnf_substitute(h, pivots, b.col(j))
        if y is None:
            return None
        cols.append(u.mul_vec(y))
    return IntMatrix.from_cols(cols, rows=a.cols)


class ModPMatrix:
    """Matrix over Z/p^k for a prime p; entries reduced into [0, p^k)."""

    __slots__ = ("modulus", "p", "k", "rows", "cols", "data")

    def __init__(self, modulus: int, p: int, k: int, rows: int, cols: int, data):
        if p**k != modulus:
            raise ValueError("modulus must equal p**k")
        self.modulus = modulus
        self.p = p
        self.k = k
        self.rows = rows
        self.cols = cols
        self.data = [[x % modulus for x in r] for r in data]

    @classmethod
    def from_int(cls, m: IntMatrix, p: int, k: int) -> "ModPMatrix":
        return cls(p**k, p, k, m.rows, m.cols, m.data)

    @classmethod
    def identity(cls, n: int, p: int, k: int) -> "ModPMatrix":
        return cls.from_int(IntMatrix.identity(n), p, k)

    def lift(self) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, [list(r) for r in self.data])

    def reduce(self, k2: int) -> "ModPMatrix":
        if k2 > self.k:
            raise ValueError("cannot increase precision by reduction")
        return ModPMatrix(self.p**k2, self.p, k2, self.rows, self.cols, self.data)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModPMatrix)
            and self.modulus == other.modulus
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.modulus, self.rows, self.cols, tuple(tuple(r) for r in self.data)))

    def __repr__(self) -> str:
        return f"ModPMatrix(mod {self.modulus}, {self.data!r})"

    def __add__(self, other: "ModPMatrix") -> "ModPMatrix":
        self._check(other)
        return ModPMatrix(
            self.modulus, self.p, self.k, self.rows, self.cols,
            [[(a + b) % self.modulus for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
        )

    def __sub__(self, other: "ModPMatrix") -> "ModPMatrix":
        self._check(other)
        return ModPMatrix(
            self.modulus, self.p, self.k, self.rows, self.cols,
            [[(a - b) % self.modulus for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
        )

    def _check(self, other):
        if self.modulus != other.modulus:
            raise DimensionError("modulus mismatch")

    def __mul__(self, other):
        if isinstance(other, int):
            return ModPMatrix(
                self.modulus, self.p, self.k, self.rows, self.cols,
                [[(a * other) % self.modulus for a in r] for r in self.data],
            )
        if isinstance(other, ModPMatrix):
            self._check(other)
            if self.cols != other.rows:
                raise DimensionError("shape mismatch in product")
            mod = self.modulus
            ot = other.data
            out = []
            for r in self.data:
                row = [0] * other.cols
                for kk, a in enumerate(r):
                    if a:
                        ok = ot[kk]
                        for j in range(other.cols):
                            row[j] = (row[j] + a * ok[j]) % mod
                out.append(row)
            return ModPMatrix(mod, self.p, self.k, self.rows, other.cols, out)
        return NotImplemented

    __rmul__ = __mul__

    def mul_vec(self, v: list[int]) -> list[int]:
        return [sum(a * x for a, x in zip(r, v)) % self.modulus for r in self.data]

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.data for a in r)

    def inverse(self) -> "ModPMatrix":
        """Inverse over Z/p^k; requires det to be a p-unit."""
        if self.rows != self.cols:
            raise DimensionError("inverse of non-square matrix")
        n, mod, p = self.rows, self.modulus, self.p
        m = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(self.data)]
        for j in range(n):
            piv = None
            for i in range(j, n):
                if m[i][j] % p != 0:
                    piv = i
                    break
            if piv is None:
                raise ZeroDivisionError("matrix is not invertible mod p^k")
            m[j], m[piv] = m[piv], m[j]
            inv = pow(m[j][j], -1, mod)
            m[j] = [(a * inv) % mod for a in m[j]]
            for i in range(n):
                if i != j and m[i][j] != 0:
                    f = m[i][j]
                    m[i] = [(a - f * b) % mod for a, b in zip(m[i], m[j])]
        return ModPMatrix(mod, self.p, self.k, n, n, [r[n:] for r in m])

    def det(self) -> int:
        return self.lift().det() % self.modulus


def det_mod_p(m: list[list[int]], p: int) -> int:
    """Determinant of a square matrix mod a prime p (Gauss elimination)."""
    n = len(m)
    a = [[x % p for x in r] for r in m]
    det = 1
    for j in range(n):
        piv = None
        for i in range(j, n):
            if a[i][j]:
                piv = i
                break
        if piv is None:
            return 0
        if piv != j:
            a[j], a[piv] = a[piv], a[j]
            det = (-det) % p
        det = (det * a[j][j]) % p
        inv = pow(a[j][j], -1, p)
        for i in range(j + 1, n):
            if a[i][j]:
                f = (a[i][j] * inv) % p
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[j])]
    return det


def rank_mod_p(m: list[list[int]], p: int) -> int:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [[x % p for x in r] for r in m]
    rank = 0
    for j in range(cols):
        piv = None
        for i in range(rank, rows):
            if a[i][j]:
                piv = i
                break
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][j], -1, p)
        a[rank] = [(x * inv) % p for x in a[rank]]
        for i in range(rows):
            if i != rank and a[i][j]:
                f = a[i][j]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[rank])]
        rank += 1
        if rank == rows:
            break
    return rank


def nullspace_mod_p(m: list[list[int]], p: int) -> list[list[int]]:
    """Basis of the right nullspace over the prime field F_p."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [[x % p for x in r] for r in m]
    pivots: list[int] = []
    rank = 0
    for j in range(cols):
        piv = None
        for i in range(rank, rows):
            if a[i][j]:
                piv = i
                break
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][j], -1, p)
        a[rank] = [(x * inv) % p for x in a[rank]]
        for i in range(rows):
            if i != rank and a[i][j]:
                f = a[i][j]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[rank])]
        pivots.append(j)
        rank += 1
    basis = []
    for f in range(cols):
        if f in pivots:
            continue
        v = [0] * cols
        v[f] = 1
        for i, j in enumerate(pivots):
            v[j] = (-a[i][f]) % p
        basis.append(v)
    return basis


def kernel_mod_prime_power(a: IntMatrix, p: int, k: int) -> list[tuple[list[int], int]]:
    """Generators of {x mod p^k : a @ x = 0 (mod p^k)}.

    Returns a list of (vector, e) where the generator has additive order
    p^e in (Z/p^k)^cols; e = k marks a free generator. The generators are
    independent in the sense that they arise from a Smith basis.
    """
    d, _, v = snf(a)
    mod = p**k
    gens = []
    for j in range(a.cols):
        diag = d.data[j][j] if j < min(a.rows, a.cols) else 0
        if diag == 0:
            vp = k
        else:
            vp = min(valuation(diag, p), k)
        if vp == 0:
            continue
        scale = p ** (k - vp)
        vec = [(scale * x) % mod for x in v.col(j)]
        gens.append((vec, vp))
    return gens

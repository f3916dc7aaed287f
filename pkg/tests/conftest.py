"""Shared fixtures: the triad order at p=7 and small helper algebras.

The triad data: R = Z localized at 7, K = Q(cbrt 6), S the integral closure
with power basis {1, t, t^2} (t^3 = 6; 7 splits completely since x^3 - 6 has
the three roots 3, 5, 6 mod 7), Lambda = {a in S : a(3) = a(5) = a(6) mod 7}
with basis {1, 7t, 7t^2}, and the pairwise congruence modules N_ij.
"""

import random
from fractions import Fraction

import pytest

from k0lat.exact_linalg import IntMatrix, RatMatrix, nullspace_mod_p
from k0lat.lattices import GLOBAL_Z, Lattice, local_at
from k0lat.orders_modules import FiniteAlgebra, LatticeModule

P = 7
ROOTS = (3, 5, 6)
R7 = local_at(P)

# multiplication by 1, t, t^2 on K in the power basis
MULT_1 = RatMatrix.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
MULT_T = RatMatrix.from_rows([[0, 0, 6], [1, 0, 0], [0, 1, 0]])
MULT_T2 = RatMatrix.from_rows([[0, 6, 0], [0, 0, 6], [1, 0, 0]])


def residue_row(root: int) -> list[int]:
    """Evaluation of x + y t + z t^2 at t = root, mod 7."""
    return [1, root % P, root * root % P]


def congruence_lattice(rows: list[list[int]], dim: int, base=R7) -> Lattice:
    """{v in Z^dim : rows @ v = 0 mod 7} as a canonical lattice."""
    gens = [[(x % P) for x in v] for v in nullspace_mod_p(rows, P)]
    gens += [[P if i == j else 0 for j in range(dim)] for i in range(dim)]
    return Lattice.from_generators(gens, dim, base)


def make_s_algebra(base=R7) -> FiniteAlgebra:
    c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    c[0][0][0] = 1
    c[0][1][1] = c[1][0][1] = 1
    c[0][2][2] = c[2][0][2] = 1
    c[1][1][2] = 1
    c[1][2][0] = c[2][1][0] = 6
    c[2][2][1] = 6
    return FiniteAlgebra(base, 3, c, [1, 0, 0], name="S")


def make_triad_algebra(base=R7) -> FiniteAlgebra:
    # basis 1, 7t, 7t^2
    c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    c[0][0][0] = 1
    c[0][1][1] = c[1][0][1] = 1
    c[0][2][2] = c[2][0][2] = 1
    c[1][1][2] = 7
    c[1][2][0] = c[2][1][0] = 294
    c[2][2][1] = 42
    return FiniteAlgebra(base, 3, c, [1, 0, 0], name="Lambda")


def triad_ambient_action():
    """Action of the Lambda basis {1, 7t, 7t^2} on K = Q^3."""
    return [MULT_1, MULT_T * 7, MULT_T2 * 7]


def triad_module(alg: FiniteAlgebra, carrier: Lattice, name: str) -> LatticeModule:
    return LatticeModule(alg, carrier, triad_ambient_action(), name=name)


def phi_diff(i: int, j: int) -> list[int]:
    """Row of the condition phi_i(a) = phi_j(a) mod 7."""
    ri, rj = residue_row(ROOTS[i]), residue_row(ROOTS[j])
    return [(a - b) % P for a, b in zip(ri, rj)]


@pytest.fixture(scope="session")
def triad():
    alg = make_triad_algebra()
    s_lat = Lattice.standard(3, R7)
    lam_lat = congruence_lattice([phi_diff(0, 1), phi_diff(1, 2)], 3)
    n12 = congruence_lattice([phi_diff(0, 1)], 3)
    n13 = congruence_lattice([phi_diff(0, 2)], 3)
    n23 = congruence_lattice([phi_diff(1, 2)], 3)
    r1, r2, r3 = (residue_row(r) for r in ROOTS)
    lam_star = congruence_lattice(
        [[(a - b - c) % P for a, b, c in zip(r1, r2, r3)]], 3
    )
    modules = {
        "S": triad_module(alg, s_lat, "S"),
        "Lambda": triad_module(alg, lam_lat, "Lambda"),
        "N12": triad_module(alg, n12, "N12"),
        "N13": triad_module(alg, n13, "N13"),
        "N23": triad_module(alg, n23, "N23"),
        "LambdaStar": triad_module(alg, lam_star, "LambdaStar"),
    }
    # M in K^2: phi1(a)=phi2(a), phi2(b)=phi3(b), phi3(a)=phi1(b)
    row_a = phi_diff(0, 1) + [0, 0, 0]
    row_b = [0, 0, 0] + phi_diff(1, 2)
    row_cross = [x % P for x in residue_row(ROOTS[2])] + [(-x) % P for x in residue_row(ROOTS[0])]
    m_lat = congruence_lattice([row_a, row_b, row_cross], 6)
    act = triad_ambient_action()
    big_action = []
    for a in act:
        data = [[Fraction(0)] * 6 for _ in range(6)]
        for i in range(3):
            for j in range(3):
                data[i][j] = a.data[i][j]
                data[3 + i][3 + j] = a.data[i][j]
        big_action.append(RatMatrix(6, 6, data))
    modules["M"] = LatticeModule(alg, m_lat, big_action, name="M")
    return {"algebra": alg, "modules": modules, "p": P}


@pytest.fixture()
def rng():
    return random.Random(0)

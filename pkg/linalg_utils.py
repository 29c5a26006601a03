"""Exact linear algebra helpers shared by every certificate module.

All matrices are sympy ``Matrix`` objects with integer or rational entries;
heavy lifting is delegated to ``DomainMatrix`` over ZZ or QQ.
"""

import logging
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy import Matrix, Rational, eye, zeros
from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp

logger = logging.getLogger(__name__)

IntVector = Tuple[int, ...]


def as_matrix(data) -> Matrix:
    """Coerce nested sequences (or a Matrix) into an exact sympy Matrix."""
    if isinstance(data, Matrix):
        return Matrix(data)
    return Matrix([[Rational(x) for x in row] for row in data])


def qq(M: Matrix) -> DomainMatrix:
    return DomainMatrix.from_Matrix(Matrix(M)).convert_to(QQ)


def rank(M: Matrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return qq(M).rank()


def is_zero(M: Matrix) -> bool:
    return all(x == 0 for x in M)


def matrix_power(M: Matrix, k: int) -> Matrix:
    if k == 0:
        return eye(M.rows)
    return (qq(M) ** k).to_Matrix()


def rank_sequence(N: Matrix, stop_at_zero: bool = True) -> List[int]:
    """Ranks of N^0, N^1, ... until the sequence stabilizes (or hits 0)."""
    ranks = [N.rows]
    power = qq(eye(N.rows))
    step = qq(N)
    while True:
        power = power * step
        r = power.rank()
        ranks.append(r)
        if r == ranks[-2] or (stop_at_zero and r == 0):
            return ranks


def rational_kernel(M: Matrix) -> List[Matrix]:
    """Basis of {x : Mx = 0} over QQ, as column matrices."""
    if M.rows == 0:
        return [eye(M.cols)[:, i] for i in range(M.cols)]
    return M.nullspace()


def integral_rows(M: Matrix) -> Matrix:
    """Scale each row by its denominator lcm; the row space is unchanged."""
    rows = []
    for i in range(M.rows):
        row = [Rational(x) for x in M.row(i)]
        den = 1
        for x in row:
            den = den * x.q // gcd(den, x.q)
        rows.append([int(x * den) for x in row])
    return Matrix(rows) if rows else zeros(0, M.cols)


def integer_kernel(M: Matrix) -> List[IntVector]:
    """Z-basis of the saturated lattice {x in Z^n : Mx = 0}.

    Uses the Smith decomposition S*A*T = D: the trailing columns of the
    unimodular T span the integer kernel.
    """
    n = M.cols
    if M.rows == 0:
        return [tuple(int(v) for v in eye(n).row(i)) for i in range(n)]
    A = DomainMatrix.from_Matrix(integral_rows(M)).convert_to(ZZ)
    smf, _, t = smith_normal_decomp(A)
    D = smf.to_Matrix()
    r = sum(1 for i in range(min(D.rows, D.cols)) if D[i, i] != 0)
    T = t.to_Matrix()
    basis = [tuple(int(v) for v in T[:, j]) for j in range(r, n)]
    return reduce_basis(basis)


def saturate(vectors: Sequence[Sequence[int]]) -> List[IntVector]:
    """Z-basis of span_Q(vectors) intersected with Z^n."""
    vectors = [tuple(v) for v in vectors if any(v)]
    if not vectors:
        return []
    n = len(vectors[0])
    orth = integer_kernel(Matrix(vectors))
    if not orth:
        return [tuple(int(v) for v in eye(n).row(i)) for i in range(n)]
    return integer_kernel(Matrix(orth))


def reduce_basis(basis: Sequence[IntVector]) -> List[IntVector]:
    """LLL-reduce an independent integer basis and fix signs."""
    if not basis:
        return []
    if len(basis) > 1:
        reduced = DomainMatrix([[ZZ(x) for x in b] for b in basis], (len(basis), len(basis[0])), ZZ).lll()
        basis = [tuple(int(x) for x in reduced.to_Matrix().row(i)) for i in range(len(basis))]
    return [normalize_sign(b) for b in basis]


def normalize_sign(v: Sequence[int]) -> IntVector:
    """Representative of +-v whose first nonzero coordinate is positive."""
    for x in v:
        if x != 0:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def content(v: Iterable[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def clear_denominators(v: Sequence) -> IntVector:
    values = [Rational(x) for x in v]
    den = 1
    for x in values:
        den = den * x.q // gcd(den, x.q)
    ints = [int(x * den) for x in values]
    g = content(ints) or 1
    return tuple(x // g for x in ints)


def congruence_diagonal(G: Matrix) -> List[Rational]:
    """Diagonalize a symmetric rational matrix by simultaneous row/column moves.

    Returns the diagonal of P^T G P for some invertible rational P; zero
    entries appear only when G is degenerate.
    """
    A = [[Rational(x) for x in G.row(i)] for i in range(G.rows)]
    n = len(A)
    diag = []

    def add_to(k, j, f):
        # R_k += f R_j then C_k += f C_j
        for c in range(n):
            A[k][c] += f * A[j][c]
        for r in range(n):
            A[r][k] += f * A[r][j]

    for k in range(n):
        if A[k][k] == 0:
            j = next((j for j in range(k + 1, n) if A[j][j] != 0), None)
            if j is not None:
                A[k], A[j] = A[j], A[k]
                for row in A:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if A[k][j] != 0), None)
                if j is None:
                    diag.append(Rational(0))
                    continue
                add_to(k, j, 1)
        pivot = A[k][k]
        for i in range(k + 1, n):
            if A[i][k] != 0:
                add_to(i, k, -A[i][k] / pivot)
        diag.append(pivot)
    return diag


def is_independent(vectors: Sequence[Sequence]) -> bool:
    if not vectors:
        return True
    return rank(Matrix([list(v) for v in vectors])) == len(vectors)


def random_unimodular(size: int, rng, steps: int = 12, bound: int = 2) -> Matrix:
    """Random product of elementary integer matrices (determinant +-1)."""
    M = eye(size)
    if size < 2:
        return M
    for _ in range(steps):
        i, j = (int(x) for x in rng.choice(size, size=2, replace=False))
        f = int(rng.integers(-bound, bound + 1)) or 1
        E = eye(size)
        E[i, j] = f
        M = M * E
    return M


def exact_inverse(M: Matrix) -> Optional[Matrix]:
    """Inverse over QQ, or None if singular."""
    if M.det() == 0:
        return None
    return qq(M).inv().to_Matrix()

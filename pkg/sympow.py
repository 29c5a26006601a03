"""Symmetric powers of lattice operators and the truncated symmetric ring.

Monomials of degree n in b variables are indexed by sorted multi-indices
(i1 <= ... <= in), ordered lexicographically.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix, Rational, eye, zeros
from sympy.ntheory.multinomial import multinomial_coefficients
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import ring

import app_config
from certificate import Certificate
from errors import (
    DependentInputs,
    DimensionTooLarge,
    NotIsotropic,
    PreconditionViolated,
    SpanNotStabilized,
    WrongJordanProfile,
    ZeroVector,
)
from lattice import Lattice, norm
from linalg_utils import is_independent, is_zero, matrix_power, rank, rank_sequence
from monodromy import jordan_type, unipotency_index

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10
STABLE_SHELLS = 3
J3 = Matrix([[1, 1, 0], [0, 1, 1], [0, 0, 1]])


@dataclass(frozen=True)
class MonomialBasis:
    nvars: int
    degree: int

    @property
    def dim(self) -> int:
        return comb(self.nvars + self.degree - 1, self.degree)

    @property
    def monomials(self) -> List[Tuple[int, ...]]:
        return _monomials(self.nvars, self.degree)

    def index(self, multi_index: Tuple[int, ...]) -> int:
        return _monomial_index(self.nvars, self.degree)[tuple(sorted(multi_index))]

    def index_of_exponent(self, exponent: Sequence[int]) -> int:
        multi = tuple(i for i, e in enumerate(exponent) for _ in range(e))
        return self.index(multi)

    def label(self, k: int) -> str:
        mono = self.monomials[k]
        parts = []
        for i in sorted(set(mono)):
            e = mono.count(i)
            parts.append(f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}")
        return "*".join(parts) or "1"


@lru_cache(maxsize=128)
def _monomials(nvars: int, degree: int) -> List[Tuple[int, ...]]:
    return list(combinations_with_replacement(range(nvars), degree))


@lru_cache(maxsize=128)
def _monomial_index(nvars: int, degree: int) -> Dict[Tuple[int, ...], int]:
    return {m: k for k, m in enumerate(_monomials(nvars, degree))}


def monomial_basis(nvars: int, degree: int, max_dim: Optional[int] = None) -> MonomialBasis:
    basis = MonomialBasis(nvars, degree)
    cap = app_config.HK_MAX_DIM if max_dim is None else max_dim
    if basis.dim > cap:
        raise DimensionTooLarge(
            f"S^{degree} of a rank-{nvars} space has dimension {basis.dim} > {cap}",
            {"dimension": basis.dim, "cap": cap},
        )
    return basis


@dataclass(frozen=True)
class RingElement:
    basis: MonomialBasis
    coeffs: Tuple[Rational, ...]

    @property
    def degree(self) -> int:
        return self.basis.degree

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def to_dict(self) -> Dict[str, str]:
        return {self.basis.label(k): f"{Rational(c).p}/{Rational(c).q}" for k, c in enumerate(self.coeffs) if c != 0}


def _poly_ring(nvars: int):
    R, *gens = ring(",".join(f"x{i}" for i in range(nvars)), QQ)
    return R, gens


def _to_column(poly, basis: MonomialBasis) -> List[Rational]:
    col = [Rational(0)] * basis.dim
    for exponent, coeff in poly.items():
        col[basis.index_of_exponent(exponent)] = QQ.to_sympy(coeff)
    return col


def sym_power_operator(T, n: int, max_dim: Optional[int] = None) -> Matrix:
    """Matrix of S^n(T) on the degree-n monomial basis."""
    T = Matrix(getattr(T, "matrix", T))
    if n == 1:
        return T
    b = T.rows
    basis = monomial_basis(b, n, max_dim)
    R, gens = _poly_ring(b)
    images = [sum((QQ.from_sympy(Rational(T[k, i])) * gens[k] for k in range(b) if T[k, i] != 0), R.zero) for i in range(b)]
    S = zeros(basis.dim, basis.dim)
    for col, mono in enumerate(basis.monomials):
        product = R.one
        for i in mono:
            product *= images[i]
        for exponent, coeff in product.items():
            S[basis.index_of_exponent(exponent), col] = QQ.to_sympy(coeff)
    return S


def expected_jordan_type(n: int) -> List[int]:
    """Block sizes of S^n(J3) - id: 2n+1, 2n-3, 2n-7, ..."""
    return list(range(2 * n + 1, 0, -4))


def verify_mon1(T1, n: int, all_degrees: bool = False) -> Certificate:
    """Certify that S^n(T1) has index 2n+1 with a unique block of size 2n+1."""
    M = Matrix(getattr(T1, "matrix", T1))
    jt1 = jordan_type(M - eye(M.rows), require_nilpotent=False)
    if unipotency_index(M) != 3 or jt1.multiplicity(3) != 1:
        raise WrongJordanProfile(
            f"T1 must be unipotent of index 3 with one block of size 3, got {jt1.to_list()}",
            {"jordan_type": jt1.to_list()},
        )
    cert = Certificate("mon1")
    degrees = range(1, n + 1) if all_degrees else [n]
    for k in degrees:
        S = sym_power_operator(M, k)
        N = S - eye(S.rows)
        ranks = rank_sequence(N)
        jt = jordan_type(N)
        cert.check(f"deg{k}:N^{2 * k}_nonzero", not is_zero(matrix_power(N, 2 * k)))
        cert.check(f"deg{k}:N^{2 * k + 1}_zero", is_zero(matrix_power(N, 2 * k + 1)))
        cert.check(f"deg{k}:unique_block_{2 * k + 1}", jt.multiplicity(2 * k + 1) == 1 and jt.largest == 2 * k + 1)
        cert.transcript.append({"degree": k, "dimension": S.rows, "rank_sequence": ranks, "jordan_type": jt.to_list()})
    cert.witnesses = {"n": n, "T1_jordan_type": jt1.to_list(), "jordan_type": cert.transcript[-1]["jordan_type"]}
    logger.info(f"Mon1 check at n={n}: valid={cert.valid}")
    return cert


def ring_power(x: Sequence, k: int) -> RingElement:
    """x^k in S^k as a coefficient vector."""
    b = len(x)
    basis = monomial_basis(b, k)
    coeffs = [Rational(0)] * basis.dim
    values = [Rational(c) for c in x]
    for exponent, mult in multinomial_coefficients(b, k).items():
        term = Rational(mult)
        for c, e in zip(values, exponent):
            if e:
                term *= c**e
        if term != 0:
            coeffs[basis.index_of_exponent(exponent)] = term
    return RingElement(basis, tuple(coeffs))


def ring_product(vectors: Sequence[Sequence]) -> RingElement:
    """v_1 * ... * v_k in S^k."""
    b = len(vectors[0])
    R, gens = _poly_ring(b)
    product = R.one
    for v in vectors:
        product *= sum((QQ.from_sympy(Rational(c)) * gens[i] for i, c in enumerate(v) if c != 0), R.zero)
    basis = monomial_basis(b, len(vectors))
    return RingElement(basis, tuple(_to_column(product, basis)))


def chain_vectors(v0, v1, v2, n: int, T=None) -> Tuple[List[RingElement], Certificate]:
    """gamma_i = v0^(n-i) v1^i (i <= n), gamma_(n+j) = v1^(n-j) v2^j (j <= n).

    N^(2n) gamma_(2n) is evaluated in the 3-dimensional model T v0 = v0,
    T v1 = v0 + v1, T v2 = v1 + v2, and also in the ambient space when T is given.
    """
    if not is_independent([v0, v1, v2]):
        raise DependentInputs("v0, v1, v2 must be linearly independent")
    words = [[v0] * (n - i) + [v1] * i for i in range(n + 1)]
    words += [[v1] * (n - j) + [v2] * j for j in range(1, n + 1)]
    gammas = [ring_product(w) for w in words]

    cert = Certificate("chain_vectors")
    cert.check("independent", rank(Matrix([list(g.coeffs) for g in gammas])) == 2 * n + 1)

    model = MonomialBasis(3, n)
    N = sym_power_operator(J3, n) - eye(model.dim)
    top = zeros(model.dim, 1)
    top[model.index((2,) * n), 0] = 1
    image = matrix_power(N, 2 * n) * top
    bottom = model.index((0,) * n)
    c = image[bottom, 0]
    cert.check("N^2n_gamma_top_is_multiple_of_gamma0", c != 0 and all(image[k, 0] == 0 for k in range(model.dim) if k != bottom))
    cert.witnesses = {"n": n, "multiple": f"{Rational(c).p}/{Rational(c).q}", "gammas": [g.to_dict() for g in gammas]}

    if T is not None:
        A = Matrix(getattr(T, "matrix", T))
        image = [A * Matrix(list(v)) for v in (v0, v1, v2)]
        V = [Matrix(list(v)) for v in (v0, v1, v2)]
        if not (image[0] == V[0] and image[1] == V[0] + V[1] and image[2] == V[1] + V[2]):
            raise PreconditionViolated(
                "T does not act as T v0 = v0, T v1 = v0 + v1, T v2 = v1 + v2",
                {"condition": "chain relations"},
            )
        Na = sym_power_operator(A, n) - eye(gammas[0].basis.dim)
        ambient = matrix_power(Na, 2 * n) * Matrix(list(gammas[-1].coeffs))
        cert.check("ambient_agrees_with_model", ambient == c * Matrix(list(gammas[0].coeffs)))
    return gammas, cert


@dataclass
class VerbitskyRing:
    """Sym(H^2) modulo the ideal spanned in degree n+1 by isotropic (n+1)-th powers.

    Vectors proportional to ``excluded`` are never sampled, so membership of
    its powers in the ideal is a consequence of the other generators.
    """

    lattice: Lattice
    n: int
    excluded: Optional[Tuple[int, ...]] = None
    generators: List[Tuple[int, ...]] = field(default_factory=list)
    rows: List[List] = field(default_factory=list)
    pivots: Tuple[int, ...] = ()
    transcript: List[Dict] = field(default_factory=list)
    stabilized: bool = False
    _higher: Dict[int, Tuple[List[List], Tuple[int, ...]]] = field(default_factory=dict)

    @property
    def generator_basis(self) -> MonomialBasis:
        return monomial_basis(self.lattice.rank, self.n + 1)

    @property
    def ideal_dimension(self) -> int:
        return len(self.pivots)

    def expected_ideal_dimension(self) -> int:
        b, n = self.lattice.rank, self.n
        return comb(b + n, n + 1) - comb(b + n - 2, n - 1)

    def build(self, budget: int = DEFAULT_BUDGET, per_shell_cap: Optional[int] = None) -> "VerbitskyRing":
        """Sample primitive isotropic lattice vectors shell by shell until the span stalls."""
        from isotropy import _proportional, isotropic_in_shell

        cap = per_shell_cap or self.generator_basis.dim
        stable = 0
        for h in range(1, budget + 1):
            samples = []
            for x in isotropic_in_shell(self.lattice, h):
                if self.excluded is not None and _proportional(x, self.excluded):
                    continue
                self.generators.append(x)
                samples.append(list(ring_power(x, self.n + 1).coeffs))
                if len(samples) >= cap:
                    break
            before = self.ideal_dimension
            if samples:
                self._absorb(samples)
            added = self.ideal_dimension - before
            self.transcript.append({"shell": h, "samples": len(samples), "dimension": self.ideal_dimension, "added": added})
            if samples and added == 0 and self.ideal_dimension > 0:
                stable += 1
            elif added:
                stable = 0
            if stable >= STABLE_SHELLS:
                self.stabilized = True
                logger.info(f"Ideal span stabilized at dimension {self.ideal_dimension} after shell {h}")
                return self
        raise SpanNotStabilized(
            f"Ideal span did not stabilize within {budget} shells",
            {"budget": budget, "transcript": self.transcript},
        )

    def _absorb(self, samples: List[List]) -> None:
        self.rows, self.pivots = _rref_rows(self.rows + samples, self.generator_basis.dim)

    def reduce(self, element: RingElement) -> RingElement:
        d = element.degree
        if d <= self.n:
            return element
        rows, pivots = (self.rows, self.pivots) if d == self.n + 1 else self._ideal_in_degree(d)
        coeffs = list(element.coeffs)
        for row, p in zip(rows, pivots):
            if coeffs[p] != 0:
                f = coeffs[p]
                coeffs = [c - f * r for c, r in zip(coeffs, row)]
        return RingElement(element.basis, tuple(coeffs))

    def power(self, x: Sequence, k: int) -> RingElement:
        return self.reduce(ring_power(x, k))

    def _ideal_in_degree(self, d: int):
        """I_d = span{g * m : g a degree-(n+1) generator, m a monomial of degree d-n-1}."""
        if d not in self._higher:
            b = self.lattice.rank
            R, gens = _poly_ring(b)
            gen_basis = self.generator_basis
            target = monomial_basis(b, d)
            polys = []
            for row in self.rows:
                p = R.zero
                for k, c in enumerate(row):
                    if c != 0:
                        term = QQ.from_sympy(Rational(c))
                        for i in gen_basis.monomials[k]:
                            term = term * gens[i]
                        p += term
                polys.append(p)
            spanning = []
            for mono in _monomials(b, d - self.n - 1):
                m = R.one
                for i in mono:
                    m *= gens[i]
                spanning.extend(_to_column(p * m, target) for p in polys)
            self._higher[d] = _rref_rows(spanning, target.dim)
        return self._higher[d]


def _rref_rows(rows: List[List], width: int) -> Tuple[List[List], Tuple[int, ...]]:
    if not rows:
        return [], ()
    dm = DomainMatrix([[QQ.from_sympy(Rational(c)) for c in row] for row in rows], (len(rows), width), QQ)
    reduced, pivots = dm.rref()
    M = reduced.to_Matrix()
    return [list(M.row(i)) for i in range(len(pivots))], tuple(pivots)


def verbitsky_power_vanishing(
    lat_H2: Lattice,
    l: Sequence[int],
    n: int,
    x: Optional[Sequence[int]] = None,
    budget: int = DEFAULT_BUDGET,
) -> Certificate:
    from isotropy import _proportional

    l = lat_H2.vector(l, "l")
    if not any(l):
        raise ZeroVector("l is the zero vector")
    if norm(lat_H2, l) != 0:
        raise NotIsotropic(f"pair(l,l) = {norm(lat_H2, l)}, expected 0", {"pair": norm(lat_H2, l)})
    quotient = VerbitskyRing(lat_H2, n, excluded=l).build(budget)
    cert = Certificate("power_vanishing")
    cert.check("l_not_a_generator", not any(_proportional(g, l) for g in quotient.generators))
    cert.check("l^n_nonzero", not quotient.power(l, n).is_zero())
    cert.check("l^(n+1)_zero", quotient.power(l, n + 1).is_zero())
    cert.witnesses = {
        "n": n,
        "l": list(l),
        "ideal_dimension": quotient.ideal_dimension,
        "expected_ideal_dimension": quotient.expected_ideal_dimension(),
        "ambient_dimension": quotient.generator_basis.dim,
    }
    if x is not None:
        x = lat_H2.vector(x, "x")
        cert.witnesses["x"] = list(x)
        cert.witnesses["x^(n+1)_nonzero"] = not quotient.power(x, n + 1).is_zero()
    cert.transcript = quotient.transcript
    return cert

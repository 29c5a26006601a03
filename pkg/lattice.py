"""Integral lattices: Gram data, signature, primitivity and orthogonal complements."""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from sympy import ImmutableMatrix, Matrix, Rational, diag

from errors import (
    DegenerateForm,
    DimensionMismatch,
    MalformedInput,
    NonPositivePolarization,
    PreconditionViolated,
    ValidationFailed,
    ZeroVector,
)
from linalg_utils import congruence_diagonal, content, integer_kernel

logger = logging.getLogger(__name__)

LatticeVector = Tuple[int, ...]

E8_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (2, 7)]


class Signature(NamedTuple):
    positive: int
    negative: int


@dataclass(frozen=True)
class Lattice:
    name: str
    gram: ImmutableMatrix
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        gram = ImmutableMatrix(self.gram)
        if gram.rows == 0 or gram.rows != gram.cols:
            raise ValidationFailed(
                f"Gram matrix of {self.name} must be square and non-empty",
                {"path": "$.gram"},
            )
        for (i, j), x in _entries(gram):
            if Rational(x).q != 1:
                raise ValidationFailed(
                    f"Gram entry ({i},{j}) of {self.name} is not an integer",
                    {"path": f"$.gram[{i}][{j}]"},
                )
            if gram[i, j] != gram[j, i]:
                raise ValidationFailed(
                    f"Gram matrix of {self.name} is not symmetric at ({i},{j})",
                    {"path": f"$.gram[{i}][{j}]"},
                )
        if gram.det() == 0:
            raise DegenerateForm(f"{self.name} is degenerate (det = 0)", {"lattice": self.name})
        object.__setattr__(self, "gram", gram)
        labels = tuple(self.labels) or tuple(f"e{i + 1}" for i in range(gram.rows))
        if len(labels) != gram.rows or len(set(labels)) != len(labels):
            raise ValidationFailed(f"Labels of {self.name} must be distinct, one per basis vector", {"path": "$.labels"})
        object.__setattr__(self, "labels", labels)

    @property
    def rank(self) -> int:
        return self.gram.rows

    @property
    def rows(self) -> List[List[int]]:
        return [[int(x) for x in self.gram.row(i)] for i in range(self.rank)]

    def determinant(self) -> int:
        return int(self.gram.det())

    def is_even(self) -> bool:
        return all(self.gram[i, i] % 2 == 0 for i in range(self.rank))

    def vector(self, x: Sequence[int], name: str = "x") -> LatticeVector:
        if len(x) != self.rank:
            raise DimensionMismatch(
                f"{name} has length {len(x)} but {self.name} has rank {self.rank}",
                {"argument": name, "length": len(x), "rank": self.rank},
            )
        return tuple(int(c) for c in x)

    def basis_vector(self, i: int) -> LatticeVector:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def change_basis(self, M: Matrix, name: Optional[str] = None) -> "Lattice":
        """Lattice with Gram M^T G M (columns of M are the new basis)."""
        return Lattice(name or f"{self.name}*M", ImmutableMatrix(M.T * self.gram * M))

    def direct_sum(self, other: "Lattice", name: Optional[str] = None) -> "Lattice":
        return Lattice(name or f"{self.name}+{other.name}", ImmutableMatrix(diag(self.gram, other.gram)))

    @classmethod
    def from_blocks(cls, blocks: Sequence[str], name: Optional[str] = None) -> "Lattice":
        """Orthogonal sum of named blocks: "U", "E8(-1)", "E8", "<k>"."""
        if not blocks:
            raise MalformedInput("At least one block is required", {"path": "$.blocks"})
        grams = [block_gram(b, f"$.blocks[{i}]") for i, b in enumerate(blocks)]
        return cls(name or "+".join(blocks), ImmutableMatrix(diag(*grams)))

    @classmethod
    def from_dict(cls, data: Dict) -> "Lattice":
        if not isinstance(data, dict):
            raise ValidationFailed("Lattice JSON must be an object", {"path": "$"})
        name = data.get("name", "lattice")
        if "blocks" in data:
            return cls.from_blocks(data["blocks"], name)
        gram = data.get("gram")
        if not isinstance(gram, list) or not all(isinstance(r, list) for r in gram):
            raise ValidationFailed("Lattice JSON needs a 'gram' list of rows", {"path": "$.gram"})
        for i, row in enumerate(gram):
            for j, x in enumerate(row):
                if isinstance(x, bool) or not isinstance(x, int):
                    raise ValidationFailed(f"Gram entry at $.gram[{i}][{j}] must be an integer", {"path": f"$.gram[{i}][{j}]"})
        if any(len(row) != len(gram) for row in gram):
            raise ValidationFailed("Gram matrix must be square", {"path": "$.gram"})
        return cls(name, ImmutableMatrix(gram), tuple(data.get("labels", ())))

    def to_dict(self) -> Dict:
        return {"name": self.name, "gram": self.rows}


def _entries(M):
    for i in range(M.rows):
        for j in range(M.cols):
            yield (i, j), M[i, j]


def block_gram(block: str, path: str = "$") -> Matrix:
    block = block.strip()
    if block == "U":
        return Matrix([[0, 1], [1, 0]])
    if block in ("E8", "E8(-1)"):
        sign = -1 if block == "E8(-1)" else 1
        E = Matrix.zeros(8, 8)
        for i in range(8):
            E[i, i] = 2 * sign
        for i, j in E8_EDGES:
            E[i, j] = E[j, i] = -sign
        return E
    match = re.fullmatch(r"<\s*(-?\d+)\s*>", block)
    if match and int(match.group(1)) != 0:
        return Matrix([[int(match.group(1))]])
    raise MalformedInput(f"Unknown lattice block {block!r} at {path}", {"path": path})


def pair(lat: Lattice, x: Sequence[int], y: Sequence[int]) -> int:
    x = lat.vector(x, "x")
    y = lat.vector(y, "y")
    G = lat.gram
    return int(sum(x[i] * G[i, j] * y[j] for i in range(lat.rank) if x[i] for j in range(lat.rank) if y[j]))


def norm(lat: Lattice, x: Sequence[int]) -> int:
    return pair(lat, x, x)


def signature(lat: Lattice) -> Signature:
    diagonal = congruence_diagonal(Matrix(lat.gram))
    return Signature(sum(1 for d in diagonal if d > 0), sum(1 for d in diagonal if d < 0))


def is_definite(lat: Lattice) -> bool:
    sig = signature(lat)
    return sig.positive == 0 or sig.negative == 0


def primitivize(x: Sequence[int]) -> Tuple[LatticeVector, int]:
    g = content(x)
    if g == 0:
        raise ZeroVector("Cannot primitivize the zero vector")
    return tuple(int(c) // g for c in x), g


def is_primitive(x: Sequence[int]) -> bool:
    return content(x) == 1


def orthogonal_complement(lat: Lattice, S: Sequence[Sequence[int]]) -> List[LatticeVector]:
    vectors = [lat.vector(s, f"S[{i}]") for i, s in enumerate(S)]
    if not vectors:
        return [lat.basis_vector(i) for i in range(lat.rank)]
    constraints = Matrix(vectors) * lat.gram
    return integer_kernel(constraints)


def sublattice(lat: Lattice, basis: Sequence[LatticeVector], name: str) -> Lattice:
    B = Matrix([list(b) for b in basis])
    return Lattice(name, ImmutableMatrix(B * lat.gram * B.T))


def primitive_sublattice(lat: Lattice, L: Sequence[int]) -> Tuple[Lattice, Signature]:
    """L-perp with its induced Gram and signature."""
    L = lat.vector(L, "L")
    q = norm(lat, L)
    if q <= 0:
        raise NonPositivePolarization(f"pair(L,L) = {q} is not positive", {"pair": q})
    sig = signature(lat)
    if sig != (3, lat.rank - 3):
        raise PreconditionViolated(
            f"{lat.name} has signature {tuple(sig)}, expected (3, {lat.rank - 3})",
            {"condition": "signature", "signature": list(sig)},
        )
    basis = orthogonal_complement(lat, [L])
    sub = sublattice(lat, basis, f"{lat.name}_L-perp")
    sub_sig = signature(sub)
    logger.info(f"Primitive sublattice of {lat.name}: rank {sub.rank}, signature {tuple(sub_sig)}")
    return sub, sub_sig

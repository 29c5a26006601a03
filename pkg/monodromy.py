"""Unipotent isometries: transvections, Jordan types, logarithms and weight filtrations."""

import logging
from dataclasses import dataclass
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import ImmutableMatrix, Matrix, Rational, eye, zeros

from certificate import Certificate
from errors import (
    DimensionMismatch,
    IndexTooHigh,
    NotIsometry,
    NotNilpotent,
    NotUnipotent,
    OddNorm,
    PreconditionViolated,
    RankTooSmall,
    SearchExhausted,
    ZeroVector,
)
from lattice import Lattice, LatticeVector, norm, pair, primitivize, signature
from linalg_utils import exact_inverse, integer_kernel, is_zero, matrix_power, rank, rank_sequence, saturate
from serialization import matrix_to_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Isometry:
    matrix: ImmutableMatrix
    lattice: Lattice

    @property
    def rank(self) -> int:
        return self.matrix.rows

    def apply(self, x: Sequence[int]) -> LatticeVector:
        x = self.lattice.vector(x)
        return tuple(int(c) for c in self.matrix * Matrix(x))

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other."""
        return Isometry(ImmutableMatrix(self.matrix * other.matrix), self.lattice)

    def inverse(self) -> "Isometry":
        return Isometry(ImmutableMatrix(exact_inverse(Matrix(self.matrix))), self.lattice)

    def power(self, m: int) -> "Isometry":
        base = self if m >= 0 else self.inverse()
        return Isometry(ImmutableMatrix(matrix_power(Matrix(base.matrix), abs(m))), self.lattice)

    def conjugate(self, M: "Isometry") -> "Isometry":
        """M^-1 T M."""
        return M.inverse().compose(self).compose(M)

    def nilpotent_part(self) -> Matrix:
        return Matrix(self.matrix) - eye(self.rank)

    def to_dict(self) -> Dict:
        return {"lattice": self.lattice.to_dict(), "matrix": matrix_to_json(Matrix(self.matrix))}


@dataclass(frozen=True)
class JordanType:
    partition: Tuple[int, ...]

    @property
    def largest(self) -> int:
        return self.partition[0] if self.partition else 0

    def multiplicity(self, size: int) -> int:
        return sum(1 for p in self.partition if p == size)

    def to_list(self) -> List[int]:
        return list(self.partition)


@dataclass(frozen=True)
class WeightFiltration:
    """Decreasing chain W0 = everything, W1 = ker log T, W2 = Im log T."""

    W2_basis: Tuple[LatticeVector, ...]
    W1_basis: Tuple[LatticeVector, ...]
    dims: Tuple[int, int, int]

    def to_dict(self) -> Dict:
        return {
            "W2": [list(w) for w in self.W2_basis],
            "W1": [list(w) for w in self.W1_basis],
            "dims": list(self.dims),
        }


@dataclass(frozen=True)
class ParityCertificate:
    """rank(T - id) equals the number of size-2 Jordan blocks when (T - id)^2 = 0."""

    rank_t_minus_id: int

    @property
    def even(self) -> bool:
        return self.rank_t_minus_id % 2 == 0

    def to_dict(self) -> Dict:
        return {"rank_T_minus_id": self.rank_t_minus_id, "blocks_of_size_2": self.rank_t_minus_id, "even": self.even}


def check_isometry(lat: Lattice, M) -> Isometry:
    M = Matrix(M)
    if M.shape != (lat.rank, lat.rank):
        raise DimensionMismatch(
            f"Matrix of shape {M.shape} does not act on {lat.name} (rank {lat.rank})",
            {"shape": list(M.shape), "rank": lat.rank},
        )
    if any(Rational(x).q != 1 for x in M):
        raise NotIsometry("Isometries must have integer entries", {"reason": "non-integral"})
    G = Matrix(lat.gram)
    image = M.T * G * M
    for i in range(lat.rank):
        for j in range(i, lat.rank):
            if image[i, j] != G[i, j]:
                x, y = lat.basis_vector(i), lat.basis_vector(j)
                raise NotIsometry(
                    f"Pairing not preserved on ({lat.labels[i]}, {lat.labels[j]}): {G[i, j]} -> {image[i, j]}",
                    {"x": list(x), "y": list(y), "before": int(G[i, j]), "after": int(image[i, j])},
                )
    return Isometry(ImmutableMatrix(M), lat)


def transvection_matrix(lat: Lattice, delta: Sequence[int], v: Sequence[int]) -> Matrix:
    """T = id + delta (Gv)^T - v (G delta)^T - q(v)/2 delta (G delta)^T."""
    G = Matrix(lat.gram)
    d, w = Matrix(list(delta)), Matrix(list(v))
    half = Rational(norm(lat, v), 2)
    return eye(lat.rank) + d * (G * w).T - w * (G * d).T - half * d * (G * d).T


def eichler_transvection(lat: Lattice, delta: Sequence[int], v: Sequence[int]) -> Isometry:
    delta = lat.vector(delta, "delta")
    v = lat.vector(v, "v")
    if not any(delta):
        raise ZeroVector("delta is the zero vector")
    q_delta = norm(lat, delta)
    if q_delta != 0:
        raise PreconditionViolated(
            f"delta is not isotropic: pair(delta,delta) = {q_delta}",
            {"condition": "pair(delta,delta)=0", "value": q_delta},
        )
    b = pair(lat, delta, v)
    if b != 0:
        raise PreconditionViolated(
            f"v is not orthogonal to delta: pair(delta,v) = {b}",
            {"condition": "pair(delta,v)=0", "value": b},
        )
    q_v = norm(lat, v)
    if q_v % 2:
        raise OddNorm(f"pair(v,v) = {q_v} is odd", {"value": q_v})
    T = check_isometry(lat, transvection_matrix(lat, delta, v))
    logger.debug(f"Transvection on {lat.name} with delta={delta}, v={v}, q(v)={q_v}")
    return T


def unipotency_index(T) -> Optional[int]:
    """Smallest k >= 1 with (T - id)^k = 0, or None when T is not unipotent."""
    M = Matrix(getattr(T, "matrix", T))
    N = M - eye(M.rows)
    power = N
    for k in range(1, M.rows + 1):
        if is_zero(power):
            return k
        power = power * N
    return None


def jordan_type(N: Matrix, require_nilpotent: bool = True) -> JordanType:
    """Block sizes of the nilpotent part of N from its rank sequence.

    The number of blocks of size >= k is rank(N^(k-1)) - rank(N^k). Without
    require_nilpotent the partition covers only the generalized 0-eigenspace.
    """
    N = Matrix(N)
    ranks = rank_sequence(N)
    if ranks[-1] != 0 and require_nilpotent:
        raise NotNilpotent(f"N^k stabilizes at rank {ranks[-1]}", {"rank_sequence": ranks})
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))] + [0]
    partition = []
    for size in range(len(at_least) - 1, 0, -1):
        partition.extend([size] * (at_least[size - 1] - at_least[size]))
    return JordanType(tuple(partition))


def log_unipotent(T) -> Matrix:
    """log T = sum_i (-1)^(i+1) (T - id)^i / i, a finite sum."""
    M = Matrix(getattr(T, "matrix", T))
    k = unipotency_index(M)
    if k is None:
        raise NotUnipotent("log is only defined here for unipotent operators")
    N = M - eye(M.rows)
    result = zeros(M.rows, M.cols)
    power = eye(M.rows)
    for i in range(1, k):
        power = power * N
        result += Rational((-1) ** (i + 1), i) * power
    return result


def exp_nilpotent(N: Matrix) -> Matrix:
    N = Matrix(N)
    result = eye(N.rows)
    power = eye(N.rows)
    for i in range(1, N.rows + 1):
        power = power * N
        if is_zero(power):
            break
        result += power / factorial(i)
    return result


def weight_filtration_order2(T: Isometry) -> Tuple[WeightFiltration, ParityCertificate]:
    k = unipotency_index(T)
    if k is None:
        raise NotUnipotent("Weight filtration needs a unipotent operator")
    if k == 1:
        raise PreconditionViolated("T - id = 0: the filtration is trivial", {"condition": "T-id!=0"})
    if k > 2:
        raise IndexTooHigh(f"(T - id)^2 != 0 (index {k})", {"index": k})
    N = log_unipotent(T)
    W2 = tuple(saturate([tuple(int(c) for c in N[:, j]) for j in range(N.cols)]))
    W1 = tuple(integer_kernel(N))
    if not all(is_zero(N * Matrix(list(w))) for w in W2):
        raise PreconditionViolated("Im log T is not contained in ker log T", {"condition": "W2<=W1"})
    filtration = WeightFiltration(W2, W1, (len(W2), len(W1), T.rank))
    parity = ParityCertificate(rank(N))
    logger.info(f"Weight filtration dims {filtration.dims}, rank(T-id) = {parity.rank_t_minus_id}")
    return filtration, parity


def large_radius_certificate(
    lat_H2: Lattice, n: int, height: int, workers: Optional[int] = None
) -> Certificate:
    """Isotropic delta -> orthogonal v -> Eichler T1 -> S^n(T1), with index checks."""
    from isotropy import find_isotropic, find_orthogonal_vector
    from sympow import sym_power_operator

    if lat_H2.rank < 5:
        raise RankTooSmall(f"{lat_H2.name} has rank {lat_H2.rank} < 5", {"rank": lat_H2.rank})
    cert = Certificate("large_radius_limit")
    sig = signature(lat_H2)
    result = find_isotropic(lat_H2, height, workers=workers)
    if not result.found:
        raise SearchExhausted(f"No isotropic delta on {lat_H2.name}: {result.status}", result.status, result.to_dict())
    delta = result.vector
    v_result = find_orthogonal_vector(lat_H2, delta, height)
    if not v_result.found:
        raise SearchExhausted(
            f"No v orthogonal to {delta} with even nonzero norm within height {height}",
            v_result.status,
            v_result.to_dict(),
        )
    v = v_result.vector
    T1 = eichler_transvection(lat_H2, delta, v)
    T = Matrix(T1.matrix) if n == 1 else sym_power_operator(Matrix(T1.matrix), n)
    N = T - eye(T.rows)
    ranks = rank_sequence(N)
    jt = jordan_type(N, require_nilpotent=False)

    cert.check("signature_3_rank_minus_3", sig == (3, lat_H2.rank - 3))
    cert.check("delta_isotropic", norm(lat_H2, delta) == 0)
    cert.check("v_orthogonal_even_nonzero", pair(lat_H2, delta, v) == 0 and norm(lat_H2, v) % 2 == 0 and norm(lat_H2, v) != 0)
    cert.check("T1_fixes_delta", T1.apply(delta) == delta)
    cert.check("T1_index_3", unipotency_index(T1) == 3)
    cert.check("T_index_2n_plus_1", ranks[-1] == 0 and len(ranks) - 1 == 2 * n + 1)
    cert.check("unique_block_2n_plus_1", jt.multiplicity(2 * n + 1) == 1)
    cert.witnesses = {
        "lattice": lat_H2.to_dict(),
        "n": n,
        "delta": list(delta),
        "v": list(v),
        "T1": matrix_to_json(Matrix(T1.matrix)),
        "T": matrix_to_json(T),
        "rank_sequence": ranks,
        "jordan_type": jt.to_list(),
        "signature": list(sig),
    }
    cert.transcript = [
        {"step": "find_isotropic", **result.to_dict()},
        {"step": "find_v", **v_result.to_dict()},
        {"step": "sym_power", "dimension": T.rows},
    ]
    logger.info(f"Large radius certificate on {lat_H2.name}, n={n}: valid={cert.valid}")
    return cert


def recheck_large_radius_certificate(payload: Dict) -> Certificate:
    """Re-run every rank computation from the serialized witnesses alone."""
    from serialization import parse_int_vector, parse_matrix
    from sympow import sym_power_operator

    witnesses = payload.get("witnesses", payload)
    lat = Lattice.from_dict(witnesses["lattice"])
    n = int(witnesses["n"])
    delta = parse_int_vector(witnesses["delta"], "$.witnesses.delta")
    v = parse_int_vector(witnesses["v"], "$.witnesses.v")
    T1 = parse_matrix(witnesses["T1"], "$.witnesses.T1", integral=True)
    T = parse_matrix(witnesses["T"], "$.witnesses.T", integral=True)

    cert = Certificate("large_radius_limit_recheck")
    cert.check("T1_is_isometry", Matrix(T1).T * Matrix(lat.gram) * T1 == Matrix(lat.gram))
    cert.check("T1_is_transvection", T1 == transvection_matrix(lat, delta, v))
    cert.check("delta_isotropic", norm(lat, delta) == 0)
    cert.check("v_orthogonal_even_nonzero", pair(lat, delta, v) == 0 and norm(lat, v) % 2 == 0 and norm(lat, v) != 0)
    cert.check("T1_index_3", unipotency_index(T1) == 3)
    expected_T = T1 if n == 1 else sym_power_operator(T1, n)
    cert.check("T_is_symmetric_power", T == expected_T)
    N = T - eye(T.rows)
    cert.check("N^2n_nonzero", not is_zero(matrix_power(N, 2 * n)))
    cert.check("N^(2n+1)_zero", is_zero(matrix_power(N, 2 * n + 1)))
    cert.check("unique_block_2n_plus_1", jordan_type(N, require_nilpotent=False).multiplicity(2 * n + 1) == 1)
    return cert


def primitive_invariant_cycle(T: Isometry) -> Certificate:
    """Primitive generator delta0 of Im (T - id)^2 for an index-3 isometry.

    Also emits the integral chain x -> (T - id)x -> (T - id)^2 x = m * delta0.
    """
    k = unipotency_index(T)
    if k is None:
        raise NotUnipotent("The invariant cycle needs a unipotent operator")
    if k != 3:
        raise PreconditionViolated(f"Expected unipotency index 3, got {k}", {"condition": "index=3", "value": k})
    N = T.nilpotent_part()
    N2 = N * N
    image = saturate([tuple(int(c) for c in N2[:, j]) for j in range(N2.cols)])
    if len(image) != 1:
        raise PreconditionViolated(
            f"(T - id)^2 has rank {len(image)}; a single block of size 3 is required",
            {"condition": "rank (T-id)^2 = 1", "value": len(image)},
        )
    j = next(j for j in range(N2.cols) if any(N2[:, j]))
    x = T.lattice.basis_vector(j)
    d1 = tuple(int(c) for c in N * Matrix(x))
    d0 = tuple(int(c) for c in N2 * Matrix(x))
    delta0, m = primitivize(d0)
    lat = T.lattice
    cert = Certificate("primitive_invariant_cycle")
    cert.check("delta0_invariant", T.apply(delta0) == delta0)
    cert.check("delta0_isotropic", norm(lat, delta0) == 0)
    cert.check("delta0_spans_image", primitivize(image[0])[0] in (delta0, tuple(-c for c in delta0)))
    cert.check("chain_top", T.apply(x) == tuple(a + b for a, b in zip(x, d1)))
    cert.check("chain_middle", T.apply(d1) == tuple(a + b for a, b in zip(d1, d0)))
    cert.witnesses = {"delta0": list(delta0), "multiple": m, "delta2": list(x), "delta1": list(d1), "delta": list(d0)}
    return cert


def rank_profile(T) -> Dict:
    M = Matrix(getattr(T, "matrix", T))
    N = M - eye(M.rows)
    return {"rank_sequence": rank_sequence(N), "index": unipotency_index(M)}

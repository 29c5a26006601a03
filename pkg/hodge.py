"""Weight-two Hodge structures on a lattice with exact Gaussian-rational periods.

A period tau is a vector of sympy numbers a + b*I with a, b rational. The
bilinear extension of the Gram form is used throughout; pair_c(tau, conj(tau))
is the hermitian norm.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import I, Matrix, Rational, conjugate, expand, im, re

from errors import (
    BadMarking,
    DimensionMismatch,
    IndexTooHigh,
    NonPositivePolarization,
    NotPeriodPoint,
    NotUnipotent,
    WrongSignature,
    ZeroVector,
)
from lattice import Lattice, norm, signature
from linalg_utils import integer_kernel, rank_sequence
from monodromy import jordan_type, log_unipotent, unipotency_index, weight_filtration_order2
from serialization import complex_vector_to_json

logger = logging.getLogger(__name__)

ComplexVector = Tuple


def complex_vector(pairs: Sequence[Sequence]) -> ComplexVector:
    return tuple(Rational(a) + I * Rational(b) for a, b in pairs)


def conjugate_vector(v: ComplexVector) -> ComplexVector:
    return tuple(expand(conjugate(z)) for z in v)


def real_part(v: ComplexVector) -> Tuple[Rational, ...]:
    return tuple(re(z) for z in v)


def imaginary_part(v: ComplexVector) -> Tuple[Rational, ...]:
    return tuple(im(z) for z in v)


def pair_c(lat: Lattice, x: Sequence, y: Sequence):
    if len(x) != lat.rank or len(y) != lat.rank:
        raise DimensionMismatch(
            f"Vectors of length {len(x)}, {len(y)} do not match rank {lat.rank}",
            {"rank": lat.rank},
        )
    G = lat.gram
    return expand(sum(x[i] * G[i, j] * y[j] for i in range(lat.rank) for j in range(lat.rank) if G[i, j] != 0))


def apply_matrix(M, v: Sequence) -> ComplexVector:
    return tuple(expand(z) for z in Matrix(M) * Matrix(list(v)))


@dataclass(frozen=True)
class PeriodDiagnostics:
    pair_tau_tau: object
    pair_tau_conj: object

    def __bool__(self) -> bool:
        return bool(self.pair_tau_tau == 0 and self.pair_tau_conj > 0)

    def to_dict(self) -> Dict:
        z = self.pair_tau_tau
        return {
            "period_point": bool(self),
            "B(tau,tau)": complex_vector_to_json([z])[0],
            "B(tau,conj(tau))": complex_vector_to_json([self.pair_tau_conj])[0],
        }


@dataclass(frozen=True)
class HodgeStructure:
    lattice: Lattice
    omega: ComplexVector
    h11_basis: Tuple[ComplexVector, ...]

    @property
    def dims(self) -> Tuple[int, int, int]:
        return (1, len(self.h11_basis), 1)

    def to_dict(self) -> Dict:
        return {
            "H20": complex_vector_to_json(self.omega),
            "H02": complex_vector_to_json(conjugate_vector(self.omega)),
            "H11": [[int(re(z)) for z in v] for v in self.h11_basis],
            "dims": list(self.dims),
        }


def _require_hk_signature(lat: Lattice) -> None:
    sig = signature(lat)
    if sig != (3, lat.rank - 3):
        raise WrongSignature(
            f"{lat.name} has signature {tuple(sig)}, expected (3, {lat.rank - 3})",
            {"signature": list(sig)},
        )


def is_period_point(lat: Lattice, tau: Sequence) -> PeriodDiagnostics:
    _require_hk_signature(lat)
    if len(tau) != lat.rank:
        raise DimensionMismatch(f"tau has length {len(tau)}, expected {lat.rank}", {"rank": lat.rank})
    if all(expand(z) == 0 for z in tau):
        raise ZeroVector("tau is the zero vector")
    return PeriodDiagnostics(pair_c(lat, tau, tau), pair_c(lat, tau, conjugate_vector(tau)))


def _require_period(lat: Lattice, tau: Sequence) -> None:
    diagnostics = is_period_point(lat, tau)
    if not diagnostics:
        raise NotPeriodPoint("tau is not a period point", diagnostics.to_dict())


def hodge_decomposition(lat: Lattice, tau: Sequence) -> HodgeStructure:
    """H20 = span(tau), H02 = span(conj tau), H11 = their common orthogonal."""
    _require_period(lat, tau)
    G = Matrix(lat.gram)
    constraints = Matrix([list(real_part(tau)), list(imaginary_part(tau))]) * G
    h11 = tuple(tuple(Rational(c) for c in v) for v in integer_kernel(constraints))
    logger.debug(f"Hodge decomposition on {lat.name}: h11 = {len(h11)}")
    return HodgeStructure(lat, tuple(tau), h11)


def is_type_11(alpha: Sequence[int], lat: Lattice, tau: Sequence) -> bool:
    """For integral alpha, B(alpha, tau) = 0 also forces B(alpha, conj tau) = 0."""
    alpha = lat.vector(alpha, "alpha")
    _require_period(lat, tau)
    return pair_c(lat, alpha, tau) == 0


def polarized_slice_member(lat: Lattice, tau: Sequence, L: Sequence[int]) -> bool:
    L = lat.vector(L, "L")
    q = norm(lat, L)
    if q <= 0:
        raise NonPositivePolarization(f"pair(L,L) = {q} is not positive", {"pair": q})
    return bool(is_period_point(lat, tau)) and pair_c(lat, tau, L) == 0


def period_from_real_pair(lat: Lattice, e: Sequence[int], f: Sequence[int]) -> ComplexVector:
    """tau = e + i f, valid when pair(e,e) = pair(f,f) > 0 and pair(e,f) = 0."""
    e, f = lat.vector(e, "e"), lat.vector(f, "f")
    qe, qf, b = norm(lat, e), norm(lat, f), pair_c(lat, e, f)
    if not (qe == qf and qe > 0 and b == 0):
        raise NotPeriodPoint(
            "e + i f needs pair(e,e) = pair(f,f) > 0 and pair(e,f) = 0",
            {"pair(e,e)": qe, "pair(f,f)": qf, "pair(e,f)": int(b)},
        )
    return tuple(Rational(a) + I * Rational(c) for a, c in zip(e, f))


@dataclass(frozen=True)
class MHSSummary:
    index: int
    dims: Optional[Tuple[int, int]] = None
    parity_even: Optional[bool] = None
    rank_sequence: Optional[List[int]] = None
    jordan_type: Optional[List[int]] = None

    def to_dict(self) -> Dict:
        out = {"index": self.index}
        if self.dims is not None:
            out["dims"] = list(self.dims)
            out["parity_even"] = self.parity_even
        if self.rank_sequence is not None:
            out["rank_sequence"] = self.rank_sequence
            out["jordan_type"] = self.jordan_type
        return out


def limit_mhs_summary(T) -> MHSSummary:
    """Dimension data of the limiting filtration; no Hodge numbers are claimed."""
    k = unipotency_index(T)
    if k is None:
        raise NotUnipotent("Limit summary needs a unipotent operator")
    if k > 3:
        raise IndexTooHigh(f"Unipotency index {k} > 3", {"index": k})
    if k == 1:
        return MHSSummary(1, (0, T.rank), True)
    if k == 2:
        filtration, parity = weight_filtration_order2(T)
        return MHSSummary(2, filtration.dims[:2], parity.even)
    N = log_unipotent(T)
    return MHSSummary(3, rank_sequence=rank_sequence(N), jordan_type=jordan_type(N).to_list())


def _marking_indices(marking: Sequence, labels: Optional[Sequence[str]]) -> List[int]:
    if labels is not None and all(isinstance(m, str) for m in marking):
        lookup = {label: i for i, label in enumerate(labels)}
        if any(m not in lookup for m in marking):
            raise BadMarking("Marking uses unknown basis labels", {"marking": list(marking)})
        marking = [lookup[m] for m in marking]
    if not all(isinstance(m, int) for m in marking) or sorted(marking) != list(range(len(marking))):
        raise BadMarking("Marking is not a bijection of basis positions", {"marking": list(marking)})
    return list(marking)


def period_vector_of_marked(tau: Sequence, marking: Sequence, labels: Optional[Sequence[str]] = None) -> ComplexVector:
    """Coordinates of tau in the marked basis: result[i] = tau[marking[i]]."""
    indices = _marking_indices(marking, labels)
    if len(indices) != len(tau):
        raise BadMarking(f"Marking has {len(indices)} entries for a vector of length {len(tau)}", {"marking": indices})
    return tuple(tau[i] for i in indices)


def compose_markings(p: Sequence[int], q: Sequence[int]) -> List[int]:
    """Marking equivalent to applying p, then q."""
    p, q = _marking_indices(p, None), _marking_indices(q, None)
    if len(p) != len(q):
        raise BadMarking("Markings of different lengths cannot be composed", {"p": p, "q": q})
    return [p[i] for i in q]

"""Symbolic Todd classes, line-bundle Chern characters and oracle evaluation.

Chern classes c1, c2, ... and the line class l are abstract symbols graded
by complex degree (deg ci = i, deg l = 1). An intersection oracle assigns
rationals to the top-degree monomials of a 2n-dimensional manifold.
"""

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Dict, FrozenSet, List, Optional, Tuple

import pandas as pd
from sympy import Poly, Rational, Symbol, exp, expand, log, series, symbols
from sympy.polys.domains import QQ
from sympy.polys.rings import ring
from sympy.polys.ring_series import rs_exp

from errors import DegreeTooLarge, MalformedInput, OracleIncomplete, PreconditionViolated, TruncationViolated
from serialization import parse_rational, rational_to_str

logger = logging.getLogger(__name__)

MAX_TODD_DEGREE = 8
l = Symbol("l")
_FACTOR = re.compile(r"(c(\d+)|l)(?:\^(\d+))?")


def chern_symbols(k: int) -> Tuple[Symbol, ...]:
    if k == 0:
        return ()
    return tuple(symbols(f"c1:{k + 1}"))


def weight(exponents: Dict[str, int]) -> int:
    return sum((1 if name == "l" else int(name[1:])) * e for name, e in exponents.items())


@dataclass(frozen=True)
class ChernPoly:
    """Graded polynomial in c1..ck and l with exact rational coefficients."""

    expr: object

    def terms(self) -> List[Tuple[Dict[str, int], Rational]]:
        expr = expand(self.expr)
        if expr == 0:
            return []
        gens = sorted(expr.free_symbols, key=_symbol_order)
        if not gens:
            return [({}, Rational(expr))]
        out = []
        for monom, coeff in Poly(expr, *gens).terms():
            exponents = {str(g): int(e) for g, e in zip(gens, monom) if e}
            out.append((exponents, Rational(coeff)))
        return out

    def component(self, degree: int) -> "ChernPoly":
        kept = [c * _monomial_expr(e) for e, c in self.terms() if weight(e) == degree]
        return ChernPoly(expand(sum(kept)) if kept else Rational(0))

    def __mul__(self, other: "ChernPoly") -> "ChernPoly":
        return ChernPoly(expand(self.expr * other.expr))

    def __eq__(self, other) -> bool:
        other_expr = other.expr if isinstance(other, ChernPoly) else other
        return expand(self.expr - other_expr) == 0

    def __hash__(self) -> int:
        return hash(expand(self.expr))

    def __str__(self) -> str:
        return str(self.expr)


def _symbol_order(s: Symbol) -> Tuple[int, int]:
    name = str(s)
    return (1, 0) if name == "l" else (0, int(name[1:]))


def _monomial_expr(exponents: Dict[str, int]):
    out = Rational(1)
    for name, e in exponents.items():
        out *= Symbol(name) ** e
    return out


def monomial_key(exponents: Dict[str, int]) -> str:
    """Canonical string form: c-classes by index, then l, e.g. "c1^2*c2*l^3"."""
    parts = []
    for name in sorted((n for n, e in exponents.items() if e), key=lambda n: _symbol_order(Symbol(n))):
        e = exponents[name]
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts) or "1"


def parse_monomial(key: str) -> Dict[str, int]:
    exponents: Dict[str, int] = {}
    text = key.replace(" ", "")
    if text == "1":
        return exponents
    for factor in text.split("*"):
        match = _FACTOR.fullmatch(factor)
        if match is None or (match.group(2) is not None and int(match.group(2)) == 0):
            raise MalformedInput(f"Bad monomial factor {factor!r} in {key!r}", {"monomial": key})
        name = "l" if match.group(1) == "l" else f"c{int(match.group(2))}"
        exponents[name] = exponents.get(name, 0) + int(match.group(3) or 1)
    return exponents


@lru_cache(maxsize=16)
def _todd_log_coefficients(max_degree: int) -> Tuple[Rational, ...]:
    """Coefficients a_k of log(x / (1 - e^-x)) = sum a_k x^k."""
    x = Symbol("x")
    s = series(log(x / (1 - exp(-x))), x, 0, max_degree + 1).removeO()
    return tuple(Rational(s.coeff(x, k)) for k in range(max_degree + 1))


def power_sums(max_degree: int) -> List:
    """Newton's identities: power sums of the Chern roots in terms of c1..ck."""
    c = chern_symbols(max_degree)
    p = [None]
    for k in range(1, max_degree + 1):
        pk = (-1) ** (k - 1) * k * c[k - 1]
        for i in range(1, k):
            pk += (-1) ** (i - 1) * c[i - 1] * p[k - i]
        p.append(expand(pk))
    return p


@lru_cache(maxsize=16)
def _todd_cached(max_degree: int) -> Tuple[ChernPoly, ...]:
    """Td = exp(sum_k a_k p_k t^k), expanded as a truncated series in t."""
    a = _todd_log_coefficients(max_degree)
    p = power_sums(max_degree)
    c = chern_symbols(max_degree)
    R, *gens = ring([str(s) for s in c] + ["t"], QQ)
    t = gens[-1]
    S = R.zero
    for k in range(1, max_degree + 1):
        if a[k] != 0:
            S += QQ.from_sympy(a[k]) * R.from_expr(p[k]) * t**k
    total = rs_exp(S, t, max_degree + 1)
    parts = [Rational(0)] * (max_degree + 1)
    for exponent, coeff in total.items():
        term = QQ.to_sympy(coeff)
        for sym, e in zip(c, exponent[:-1]):
            term *= sym**e
        parts[exponent[-1]] += term
    return tuple(ChernPoly(expand(part)) for part in parts)


def todd_polynomials(max_degree: int) -> List[ChernPoly]:
    """Td_0 .. Td_max as universal polynomials in the Chern classes."""
    if max_degree > MAX_TODD_DEGREE:
        raise DegreeTooLarge(f"Todd polynomials are computed up to degree {MAX_TODD_DEGREE}", {"max_degree": max_degree})
    if max_degree < 0:
        raise PreconditionViolated("max_degree must be nonnegative", {"condition": "max_degree>=0"})
    if max_degree == 0:
        return [ChernPoly(Rational(1))]
    return list(_todd_cached(max_degree))


def line_bundle_character(max_degree: int) -> ChernPoly:
    """ch(O(D)) = sum_{k <= max} l^k / k!."""
    return ChernPoly(sum(l**k / factorial(k) for k in range(max_degree + 1)))


def todd_of_line_sum(roots: Tuple[Symbol, ...], degree: int):
    """Degree-d part of prod_j x_j / (1 - e^-x_j) over formal line roots."""
    x = Symbol("x")
    s = series(x / (1 - exp(-x)), x, 0, degree + 1).removeO()
    b = [Rational(s.coeff(x, k)) for k in range(degree + 1)]
    total = Rational(1)
    for r in roots:
        total = expand(total * sum(b[k] * r**k for k in range(degree + 1)))
    grading = Symbol("grading")
    graded = expand(total.xreplace({r: grading * r for r in roots}))
    return expand(graded.coeff(grading, degree))


@dataclass
class IntersectionOracle:
    """Top-degree integrals on a 2n-dimensional manifold, keyed by canonical monomial."""

    n: int
    values: Dict[str, Rational] = field(default_factory=dict)
    vanishing_classes: FrozenSet[str] = frozenset()

    def __post_init__(self):
        for key, value in self.values.items():
            exponents = parse_monomial(key)
            if weight(exponents) != 2 * self.n:
                raise MalformedInput(f"Monomial {key} does not have degree {2 * self.n}", {"monomial": key})
            if exponents.get("l", 0) > self.n and value != 0:
                raise TruncationViolated(
                    f"{key} has l^{exponents['l']} with {exponents['l']} > n = {self.n} but value {value}",
                    {"monomial": key, "value": rational_to_str(value)},
                )

    @classmethod
    def from_dict(cls, data: Dict) -> "IntersectionOracle":
        if not isinstance(data, dict) or "n" not in data or not isinstance(data.get("values"), dict):
            raise MalformedInput("Oracle JSON needs 'n' and a 'values' object", {"path": "$"})
        values = {}
        for key, value in data["values"].items():
            values[monomial_key(parse_monomial(key))] = parse_rational(value, f"$.values[{key!r}]")
        return cls(int(data["n"]), values, frozenset(data.get("vanishing_classes", [])))

    def to_dict(self) -> Dict:
        out = {"n": self.n, "values": {k: rational_to_str(v) for k, v in sorted(self.values.items())}}
        if self.vanishing_classes:
            out["vanishing_classes"] = sorted(self.vanishing_classes)
        return out

    def scaled(self, factor) -> "IntersectionOracle":
        factor = Rational(factor)
        return IntersectionOracle(self.n, {k: v * factor for k, v in self.values.items()}, self.vanishing_classes)

    def value(self, exponents: Dict[str, int]) -> Rational:
        key = monomial_key(exponents)
        if exponents.get("l", 0) > self.n:
            return Rational(0)
        if any(name in self.vanishing_classes for name in exponents):
            return Rational(0)
        if key not in self.values:
            raise OracleIncomplete(f"Oracle has no value for {key}", {"monomial": key})
        return self.values[key]

    def integrate(self, poly: ChernPoly) -> Rational:
        """Integral of the degree-2n component."""
        total = Rational(0)
        for exponents, coeff in poly.terms():
            if weight(exponents) == 2 * self.n:
                total += coeff * self.value(exponents)
        return total


def _require_degree(oracle: IntersectionOracle, n: int) -> None:
    if oracle.n != n:
        raise PreconditionViolated(f"Oracle is for n = {oracle.n}, not {n}", {"condition": "oracle.n=n"})


def euler_characteristic(oracle: IntersectionOracle, n: int) -> Tuple[Rational, pd.DataFrame]:
    """Integral of (Td * ch(L)) in degree 2n with a term-by-term transcript.

    Row k is (1/k!) Td_{2n-k} l^k; rows with k > n vanish by truncation.
    """
    _require_degree(oracle, n)
    todd = todd_polynomials(2 * n)
    rows = []
    total = Rational(0)
    for k in range(2 * n + 1):
        term = ChernPoly(expand(todd[2 * n - k].expr * l**k / factorial(k)))
        value = oracle.integrate(term)
        total += value
        rows.append({"k": k, "term": str(term), "value": rational_to_str(value), "truncated": k > n})
    transcript = pd.DataFrame(rows, columns=["k", "term", "value", "truncated"])
    logger.info(f"chi(O(D)) = {total} for n = {n}")
    return total, transcript


def vanishing_relation_check(oracle: IntersectionOracle, n: int) -> Dict:
    """Audit the relations Int Td_{2n-k} l^k = 0 for 0 < k <= n."""
    _require_degree(oracle, n)
    todd = todd_polynomials(2 * n)
    relations = []
    for k in range(1, n + 1):
        value = oracle.integrate(ChernPoly(expand(todd[2 * n - k].expr * l**k)))
        relations.append({"k": k, "value": rational_to_str(value), "passed": value == 0})
    top = oracle.integrate(todd[2 * n])
    chi, _ = euler_characteristic(oracle, n)
    return {
        "n": n,
        "relations": relations,
        "all_passed": all(r["passed"] for r in relations),
        "todd_integral": rational_to_str(top),
        "chi": rational_to_str(chi),
        "expected_chi": n + 1,
        "consistent_with_n_plus_1": chi == n + 1,
    }


def top_degree_monomials(n: int) -> List[str]:
    """All canonical monomials of weight 2n in c1..c2n and l."""
    names = [f"c{i}" for i in range(1, 2 * n + 1)] + ["l"]
    out = []

    def walk(i: int, remaining: int, exponents: Dict[str, int]):
        if remaining == 0:
            out.append(monomial_key(exponents))
            return
        if i == len(names):
            return
        w = weight({names[i]: 1})
        for e in range(remaining // w, -1, -1):
            walk(i + 1, remaining - e * w, {**exponents, names[i]: e} if e else exponents)

    walk(0, 2 * n, {})
    return sorted(out)

"""Bounded exact search for isotropic vectors, polarizations and cusp classes.

Candidates are visited in a fixed total order so every witness is
reproducible:

1. max-norm shells 1, 2, ..., height;
2. inside a shell, by the number of nonzero coordinates;
3. then by the support positions, lexicographically;
4. then by the coordinate values, lexicographically in the digit order
   1, -1, 2, -2, ...

Only the sign representative with a positive first nonzero coordinate is
visited. A mod-2/mod-3 residue sieve discards candidates that cannot have
Q(x) = 0 (or Q(x) even) before the exact evaluation.
"""

import logging
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix

import app_config
from errors import (
    GeneratorMovesPolarization,
    GeneratorNotIsometry,
    NotIsotropic,
    ZeroVector,
)
from lattice import Lattice, LatticeVector, is_definite, is_primitive, norm, pair
from linalg_utils import content, exact_inverse, normalize_sign

logger = logging.getLogger(__name__)

FOUND = "found"
NOT_FOUND = "not_found"
NONEXISTENCE = "nonexistence"

SIEVE_TABLE_LIMIT = 20000


@dataclass(frozen=True)
class SearchResult:
    status: str
    vector: Optional[LatticeVector] = None
    height: int = 0
    examined: int = 0
    sieved: int = 0

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def to_dict(self) -> Dict:
        return {
            "result": self.status,
            "vector": list(self.vector) if self.vector is not None else None,
            "height": self.height,
            "examined": self.examined,
            "sieved": self.sieved,
        }


@dataclass(frozen=True)
class Criterion:
    """Picklable acceptance test evaluated on (Q(x), B(x, delta), x).

    kind is one of "isotropic", "second", "polarization", "even_nonzero".
    """

    kind: str
    delta: Optional[Tuple[int, ...]] = None

    @property
    def needs_zero_norm(self) -> bool:
        return self.kind in ("isotropic", "second")

    def accepts(self, q: int, b_delta: int, x: Tuple[int, ...]) -> bool:
        if self.kind == "isotropic":
            return q == 0 and b_delta == 0
        if self.kind == "second":
            return q == 0 and not _proportional(x, self.delta)
        if self.kind == "polarization":
            return q > 0 and b_delta == 0
        if self.kind == "even_nonzero":
            return q != 0 and q % 2 == 0 and b_delta == 0
        raise ValueError(f"Unknown search criterion {self.kind}")


def _proportional(x: Sequence[int], y: Sequence[int]) -> bool:
    return all(x[i] * y[j] == x[j] * y[i] for i in range(len(x)) for j in range(i + 1, len(x)))


def digits(h: int) -> List[int]:
    out = []
    for k in range(1, h + 1):
        out.extend([k, -k])
    return out


def shell_tasks(rank: int, h: int) -> List[Tuple[int, Tuple[int, ...]]]:
    """Work units of one shell, in enumeration order: (shell, support positions)."""
    return [(h, positions) for s in range(1, rank + 1) for positions in combinations(range(rank), s)]


def task_vectors(rank: int, h: int, positions: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    values = digits(h)
    positive = [v for v in values if v > 0]
    for combo in product(positive, *([values] * (len(positions) - 1))):
        if max(abs(v) for v in combo) != h:
            continue
        x = [0] * rank
        for p, v in zip(positions, combo):
            x[p] = v
        yield tuple(x)


@lru_cache(maxsize=64)
def residue_table(gram: Tuple[Tuple[int, ...], ...], p: int) -> Optional[frozenset]:
    """Residue classes r in (Z/p)^rank with Q(r) = 0 mod p, or None if too large."""
    rank = len(gram)
    if p**rank > SIEVE_TABLE_LIMIT:
        return None
    zeros = set()
    for r in product(range(p), repeat=rank):
        if _quadratic(gram, r, range(rank)) % p == 0:
            zeros.add(r)
    return frozenset(zeros)


def _quadratic(gram, x, support) -> int:
    return sum(gram[i][j] * x[i] * x[j] for i in support for j in support)


def _scan_task(args) -> Tuple[Optional[Tuple[int, ...]], int, int]:
    """Scan one (shell, support) unit; returns (first hit, examined, sieved)."""
    gram, criterion, h, positions = args
    rank = len(gram)
    g_delta = None
    if criterion.delta is not None:
        g_delta = [sum(gram[i][j] * criterion.delta[j] for j in range(rank)) for i in range(rank)]
    sieves = []
    if criterion.needs_zero_norm:
        sieves = [(p, t) for p in (2, 3) if (t := residue_table(gram, p)) is not None]
    elif criterion.kind == "even_nonzero":
        sieves = [(2, t) for t in [residue_table(gram, 2)] if t is not None]
    examined = sieved = 0
    for x in task_vectors(rank, h, positions):
        examined += 1
        if any(tuple(c % p for c in x) not in table for p, table in sieves):
            sieved += 1
            continue
        if content(x) != 1:
            continue
        q = _quadratic(gram, x, positions)
        b_delta = sum(x[i] * g_delta[i] for i in positions) if g_delta is not None else 0
        if criterion.accepts(q, b_delta, x):
            return x, examined, sieved
    return None, examined, sieved


def search(
    lat: Lattice,
    criterion: Criterion,
    height: int,
    workers: Optional[int] = None,
    seed: Optional[int] = None,
) -> SearchResult:
    """First vector in enumeration order accepted by criterion, up to height.

    With workers > 1 each shell fans out across processes; the reduction keeps
    the earliest task with a hit, so the answer never depends on scheduling.
    """
    workers = app_config.HK_WORKERS if workers is None else workers
    gram = tuple(tuple(row) for row in lat.rows)
    examined = sieved = 0
    for h in range(1, height + 1):
        tasks = shell_tasks(lat.rank, h)
        if workers > 1 and len(tasks) > 1:
            results = _run_parallel(gram, criterion, tasks, workers, seed)
        else:
            results = []
            for _, positions in tasks:
                hit = _scan_task((gram, criterion, h, positions))
                results.append(hit)
                if hit[0] is not None:
                    break
        for hit, n_examined, n_sieved in results:
            examined += n_examined
            sieved += n_sieved
            if hit is not None:
                logger.info(f"{criterion.kind} search on {lat.name}: found {hit} in shell {h} after {examined} candidates")
                return SearchResult(FOUND, hit, h, examined, sieved)
    logger.info(f"{criterion.kind} search on {lat.name}: nothing within height {height} ({examined} candidates)")
    return SearchResult(NOT_FOUND, None, height, examined, sieved)


def _run_parallel(gram, criterion, tasks, workers, seed):
    order = np.random.default_rng(seed).permutation(len(tasks)) if seed is not None else range(len(tasks))
    results = [None] * len(tasks)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futures = {int(i): ex.submit(_scan_task, (gram, criterion, tasks[i][0], tasks[i][1])) for i in order}
        for i, fut in futures.items():
            results[i] = fut.result()
    # keep everything up to the earliest hit
    for i, (hit, _, _) in enumerate(results):
        if hit is not None:
            return results[: i + 1]
    return results


def find_isotropic(lat: Lattice, height: int, workers: Optional[int] = None, seed: Optional[int] = None) -> SearchResult:
    if is_definite(lat):
        logger.info(f"{lat.name} is definite: no isotropic vectors exist")
        return SearchResult(NONEXISTENCE, None, height)
    return search(lat, Criterion("isotropic"), height, workers, seed)


def _require_isotropic(lat: Lattice, delta: Sequence[int], name: str = "delta") -> LatticeVector:
    delta = lat.vector(delta, name)
    if not any(delta):
        raise ZeroVector(f"{name} is the zero vector")
    q = norm(lat, delta)
    if q != 0:
        raise NotIsotropic(f"pair({name},{name}) = {q}, expected 0", {"pair": q})
    return delta


def find_polarization(lat: Lattice, delta: Sequence[int], height: int, workers: Optional[int] = None) -> SearchResult:
    delta = _require_isotropic(lat, delta)
    return search(lat, Criterion("polarization", delta), height, workers)


def find_second_isotropic(lat: Lattice, delta: Sequence[int], height: int, workers: Optional[int] = None) -> SearchResult:
    delta = _require_isotropic(lat, delta)
    return search(lat, Criterion("second", delta), height, workers)


def find_orthogonal_vector(lat: Lattice, delta: Sequence[int], height: int, kind: str = "even_nonzero") -> SearchResult:
    """v with pair(v, delta) = 0 satisfying kind ("even_nonzero" or "polarization")."""
    delta = lat.vector(delta, "delta")
    return search(lat, Criterion(kind, delta), height)


def isotropic_in_shell(lat: Lattice, h: int) -> Iterator[LatticeVector]:
    """Primitive isotropic vectors of max-norm exactly h, in enumeration order."""
    gram = lat.rows
    for _, positions in shell_tasks(lat.rank, h):
        for x in task_vectors(lat.rank, h, positions):
            if _quadratic(gram, x, positions) == 0 and content(x) == 1:
                yield x


def all_isotropic(lat: Lattice, height: int, orthogonal_to: Optional[Sequence[int]] = None) -> List[LatticeVector]:
    """Every primitive isotropic vector up to height (one per sign), in enumeration order."""
    found = []
    for h in range(1, height + 1):
        for x in isotropic_in_shell(lat, h):
            if orthogonal_to is None or pair(lat, x, orthogonal_to) == 0:
                found.append(x)
    return found


@dataclass
class OrbitClass:
    representative: LatticeVector
    members: List[LatticeVector] = field(default_factory=list)
    witness_words: Dict[LatticeVector, List[str]] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "representative": list(self.representative),
            "members": [list(m) for m in self.members],
            "witness_words": [
                {"member": list(m), "word": self.witness_words[m]} for m in self.members
            ],
        }


def _generator_matrix(g) -> Matrix:
    return Matrix(getattr(g, "matrix", g))


def _inverse_token(token: str) -> str:
    return token[:-3] if token.endswith("^-1") else f"{token}^-1"


def _invert_word(word: List[str]) -> List[str]:
    return [_inverse_token(t) for t in reversed(word)]


def cusp_orbit_partition(
    lat: Lattice,
    L: Optional[Sequence[int]],
    generators: Sequence,
    height: int,
    depth: int,
) -> List[OrbitClass]:
    """Partition primitive isotropic vectors orthogonal to L into merged classes.

    Two vectors share a class only if a word of length <= depth in the
    generators and their inverses (or a chain of such words) maps one to the
    other up to sign. Distinct classes are not claimed to be distinct orbits.
    """
    G = Matrix(lat.gram)
    L = lat.vector(L, "L") if L is not None and any(L) else None
    letters = []
    for i, g in enumerate(generators):
        M = _generator_matrix(g)
        if M.shape != G.shape or M.T * G * M != G:
            raise GeneratorNotIsometry(f"Generator g{i} does not preserve the form of {lat.name}", {"generator": i})
        if L is not None and tuple(int(c) for c in M * Matrix(L)) != L:
            raise GeneratorMovesPolarization(f"Generator g{i} does not fix L", {"generator": i})
        Minv = exact_inverse(M)
        letters.append((f"g{i}", M))
        letters.append((f"g{i}^-1", Minv))

    points = all_isotropic(lat, height, L)
    index = {p: k for k, p in enumerate(points)}
    parent = list(range(len(points)))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    edges: Dict[int, List[Tuple[int, List[str]]]] = {k: [] for k in range(len(points))}
    for k, p in enumerate(points):
        seen = {p}
        frontier = deque([(p, [])])
        while frontier:
            x, word = frontier.popleft()
            if len(word) >= depth:
                continue
            for token, M in letters:
                y = normalize_sign(tuple(int(c) for c in M * Matrix(x)))
                if y in seen:
                    continue
                seen.add(y)
                w = word + [token]
                frontier.append((y, w))
                j = index.get(y)
                if j is not None and find(j) != find(k):
                    parent[find(j)] = find(k)
                    edges[k].append((j, w))
                    edges[j].append((k, _invert_word(w)))

    groups: Dict[int, List[int]] = {}
    for k in range(len(points)):
        groups.setdefault(find(k), []).append(k)

    classes = []
    for members in sorted(groups.values(), key=min):
        rep = members[0]
        words = {rep: []}
        queue = deque([rep])
        while queue:
            a = queue.popleft()
            for b, w in edges[a]:
                if b not in words:
                    words[b] = words[a] + w
                    queue.append(b)
        classes.append(
            OrbitClass(
                representative=points[rep],
                members=[points[m] for m in members],
                witness_words={points[m]: words[m] for m in members},
            )
        )
    logger.info(f"Cusp partition of {lat.name}: {len(points)} isotropic lines in {len(classes)} classes (depth {depth})")
    return classes


def apply_word(word: Sequence[str], generators: Sequence, x: Sequence[int]) -> LatticeVector:
    """Apply a witness word (first token first) to x, up to sign."""
    mats = {}
    for i, g in enumerate(generators):
        M = _generator_matrix(g)
        mats[f"g{i}"] = M
        mats[f"g{i}^-1"] = exact_inverse(M)
    v = Matrix(list(x))
    for token in word:
        v = mats[token] * v
    return normalize_sign(tuple(int(c) for c in v))


def verify_found(lat: Lattice, result: SearchResult) -> bool:
    """Independent re-evaluation of a found isotropic witness."""
    return result.found and norm(lat, result.vector) == 0 and is_primitive(result.vector)

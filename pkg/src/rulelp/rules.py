"""Chain-rule semantics: grounding, coverage columns, negative evidence.

A clause is an ordered body of relation labels; it holds on a pair (x, y)
iff a simple relational path realizes it.  During training-time grounding
the edge being explained is excluded from traversal, so a rule cannot
justify an edge with that edge itself; test-time scoring never excludes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .kg import KnowledgeGraph, Vocab
from .paths import NO_EDGE, kernels

Edge = tuple[int, int, int]  # (tail, base relation, head)


@dataclass(frozen=True, order=True)
class Clause:
    """Ordered body of relation labels (reverse labels allowed)."""

    body: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.body) < 1:
            raise ValueError("clause body must contain at least one relation")

    def __len__(self) -> int:
        return len(self.body)

    @property
    def complexity(self) -> int:
        return 1 + len(self.body)


@dataclass(frozen=True)
class Rule:
    clause: Clause
    weight: float


@dataclass
class RuleSet:
    """Weighted rules sharing one head relation; empty sets score zero."""

    head: int
    rules: list[Rule] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def complexity(self) -> int:
        return sum(r.clause.complexity for r in self.rules)


@dataclass
class RuleColumn:
    """LP data of one candidate rule for one head relation."""

    clause: Clause
    coverage: np.ndarray  # uint8, one bit per edge of the head relation
    neg: float
    complexity: int


def reverse_clause(clause: Clause, num_base_relations: int) -> Clause:
    """Reverse the body order and flip every label; an involution."""
    n = num_base_relations
    return Clause(tuple(r + n if r < n else r - n
                        for r in reversed(clause.body)))


def _excl_tuple(g: KnowledgeGraph, excluded_edge: Optional[Edge]):
    if excluded_edge is None:
        return NO_EDGE
    t, r, h = excluded_edge
    if not (0 <= r < g.num_base_relations):
        raise ValueError("excluded edge must use a base relation id")
    return (t, h, r, r + g.num_base_relations)


def clause_holds(g: KnowledgeGraph, clause: Clause, x: int, y: int,
                 excluded_edge: Optional[Edge] = None) -> bool:
    """Does a simple path from x to y realize the clause body."""
    return bool(kernels.holds(g.indptr, g.nbrs, g.num_labels, clause.body,
                              x, y, _excl_tuple(g, excluded_edge)))


def reachable_set(g: KnowledgeGraph, clause: Clause, start: int,
                  excluded_edge: Optional[Edge] = None) -> set[int]:
    """All v with ``clause_holds(g, clause, start, v, excluded_edge)``."""
    arr = kernels.reachable(g.indptr, g.nbrs, g.num_labels, g.num_entities,
                            clause.body, start, _excl_tuple(g, excluded_edge))
    return set(int(v) for v in arr)


def coverage_column(g: KnowledgeGraph, r: int, clause: Clause) -> np.ndarray:
    """Per-edge coverage bits of ``clause`` on the edge list of relation r.

    Bit i is set iff the clause holds on edge i of the relation with that
    edge excluded from its own grounding.
    """
    tails, heads = g.edges(r)
    return kernels.coverage(g.indptr, g.nbrs, g.num_labels, clause.body,
                            tails, heads, r, r + g.num_base_relations)


def neg_count(g: KnowledgeGraph, r: int, clause: Clause,
              sample_frac: float = 1.0, seed: int = 0) -> float:
    """Invalid start/end point count of the clause across relation edges.

    Per edge (t, r, h): endpoints reached from t that are not known heads,
    plus start points reached from h along the reversed clause that are not
    known tails, always with the edge itself removed from traversal.  With
    sample_frac < 1 the sum runs over ceil(frac * m) seeded sampled edges
    and is scaled by m / sample_size, an unbiased estimate of the exact
    count; with sample_frac = 1 the result is exact and integral.
    """
    if not (0.0 < sample_frac <= 1.0):
        raise ValueError("sample_frac must lie in (0, 1]")
    tails, heads = g.edges(r)
    m = len(tails)
    if m == 0:
        return 0.0
    if sample_frac >= 1.0:
        idx = np.arange(m, dtype=np.int64)
        scale = 1.0
    else:
        k = min(m, math.ceil(sample_frac * m))
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(m, size=k, replace=False)).astype(np.int64)
        scale = m / k
    rev = reverse_clause(clause, g.num_base_relations)
    total = kernels.neg_total(g.indptr, g.nbrs, g.num_labels, g.num_entities,
                              clause.body, rev.body, tails, heads,
                              r, r + g.num_base_relations, idx)
    return float(total) * scale


def score(g: KnowledgeGraph, rs: RuleSet, x: int, y: int) -> float:
    """Weighted sum of clause groundings on (x, y); no exclusion."""
    total = 0.0
    for rule in rs.rules:
        if clause_holds(g, rule.clause, x, y):
            total += rule.weight
    return total


ReachCache = dict[tuple[Clause, int], np.ndarray]


def _accumulate(g: KnowledgeGraph, clause: Clause, start: int, weight: float,
                scores: dict[int, float], cache: Optional[ReachCache]) -> None:
    if cache is not None:
        key = (clause, start)
        arr = cache.get(key)
        if arr is None:
            arr = kernels.reachable(g.indptr, g.nbrs, g.num_labels,
                                    g.num_entities, clause.body, start)
            cache[key] = arr
    else:
        arr = kernels.reachable(g.indptr, g.nbrs, g.num_labels,
                                g.num_entities, clause.body, start)
    for v in arr:
        v = int(v)
        scores[v] = scores.get(v, 0.0) + weight


def score_all_tails(g: KnowledgeGraph, rs: RuleSet, t: int,
                    cache: Optional[ReachCache] = None) -> dict[int, float]:
    """Scores of every entity as answer to (t, head, ?); zeros omitted."""
    scores: dict[int, float] = {}
    for rule in rs.rules:
        _accumulate(g, rule.clause, t, rule.weight, scores, cache)
    return scores


def score_all_heads(g: KnowledgeGraph, rs: RuleSet, h: int,
                    cache: Optional[ReachCache] = None) -> dict[int, float]:
    """Scores of every entity as answer to (?, head, h); zeros omitted."""
    scores: dict[int, float] = {}
    n = g.num_base_relations
    for rule in rs.rules:
        _accumulate(g, reverse_clause(rule.clause, n), h, rule.weight,
                    scores, cache)
    return scores


def remap_ruleset(rs: RuleSet, src_relations: Vocab, dst_relations: Vocab,
                  dst_num_base: int, dst_head: int) -> RuleSet:
    """Translate a rule set between datasets by relation token.

    Rules whose body mentions a relation unknown to the destination
    vocabulary are dropped; they could never fire there.
    """
    src_n = len(src_relations)
    out = RuleSet(head=dst_head)
    for rule in rs.rules:
        body: list[int] = []
        for rel in rule.clause.body:
            base = rel if rel < src_n else rel - src_n
            mapped = dst_relations.id_of(src_relations.name(base))
            if mapped is None:
                body = []
                break
            body.append(mapped if rel < src_n else mapped + dst_num_base)
        if body:
            out.rules.append(Rule(Clause(tuple(body)), rule.weight))
    return out

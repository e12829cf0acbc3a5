"""Filtered-ranking evaluation: rank policies, MRR, Hits@k.

Every test fact spawns two queries, one per direction.  Candidates are all
interned entities minus the other known true answers (filtered protocol).
Tied scores are handled by a pluggable policy; the headline policy draws
the target's position uniformly within its tied block from a per-query
RNG stream, so results are independent of evaluation order and worker
scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .kg import FilterIndex, KnowledgeGraph, Vocab
from .rules import ReachCache, RuleSet, score_all_heads, score_all_tails
from .util import derive_seed

POLICIES = ("random-break", "optimistic", "pessimistic", "midpoint")


@dataclass(frozen=True)
class TiePolicy:
    """How to rank a target inside a block of equally scored candidates."""

    kind: str = "random-break"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in POLICIES:
            raise ValueError(f"unknown tie policy {self.kind!r}")


def rank_from_counts(n_greater: int, n_equal: int, kind: str,
                     rng: Optional[np.random.Generator] = None) -> float:
    """Rank given the counts of strictly-better and equal competitors.

    ``n_equal`` excludes the target itself.  Random-break draws the
    target's position uniformly over the tied block, i.e. adds a uniform
    integer from {0..n_equal}.
    """
    base = n_greater + 1
    if kind == "optimistic":
        return float(base)
    if kind == "pessimistic":
        return float(base + n_equal)
    if kind == "midpoint":
        return base + n_equal / 2.0
    if kind == "random-break":
        if n_equal == 0:
            return float(base)
        if rng is None:
            raise ValueError("random-break ranking needs an RNG stream")
        return float(base + int(rng.integers(0, n_equal + 1)))
    raise ValueError(f"unknown tie policy {kind!r}")


def rank_of(candidate_scores: Mapping[int, float], target: int, kind: str,
            rng: Optional[np.random.Generator] = None) -> float:
    """Rank of ``target`` among the mapping's keys under a tie policy."""
    s = candidate_scores[target]
    n_greater = 0
    n_equal = 0
    for v, sc in candidate_scores.items():
        if v == target:
            continue
        if sc > s:
            n_greater += 1
        elif sc == s:
            n_equal += 1
    return rank_from_counts(n_greater, n_equal, kind, rng)


@dataclass
class Metrics:
    mrr: float = 0.0
    hits1: float = 0.0
    hits3: float = 0.0
    hits10: float = 0.0
    num_queries: int = 0
    per_relation: dict[int, "Metrics"] = field(default_factory=dict)

    def to_json(self, relations: Optional[Vocab] = None) -> dict:
        out = {
            "mrr": self.mrr,
            "hits1": self.hits1,
            "hits3": self.hits3,
            "hits10": self.hits10,
            "num_queries": self.num_queries,
        }
        if self.per_relation:
            name = relations.name if relations else str
            out["per_relation"] = {
                name(r): m.to_json() for r, m in
                sorted(self.per_relation.items(), key=lambda kv: kv[0])
            }
        return out


class _Accum:
    __slots__ = ("rec", "h1", "h3", "h10", "n")

    def __init__(self) -> None:
        self.rec = 0.0
        self.h1 = 0
        self.h3 = 0
        self.h10 = 0
        self.n = 0

    def add(self, rank: float) -> None:
        self.rec += 1.0 / rank
        self.h1 += rank <= 1
        self.h3 += rank <= 3
        self.h10 += rank <= 10
        self.n += 1

    def metrics(self) -> Metrics:
        n = max(self.n, 1)
        return Metrics(self.rec / n, self.h1 / n, self.h3 / n,
                       self.h10 / n, self.n)


def _tie_counts(scores: dict[int, float], target: int, excluded: set[int],
                num_candidates: int) -> tuple[int, int]:
    """Strictly-better / equal counts of the target among candidates.

    ``scores`` holds only positive entries; every unscored candidate sits
    at exactly 0.0, which keeps float ties exact.
    """
    s = scores.get(target, 0.0)
    n_greater = 0
    n_equal = 0
    n_scored = 0
    for v, sc in scores.items():
        if v in excluded:
            continue
        n_scored += 1
        if v == target:
            continue
        if sc > s:
            n_greater += 1
        elif sc == s:
            n_equal += 1
    if s == 0.0:
        n_equal += num_candidates - n_scored - 1  # other zero-scored ones
    return n_greater, n_equal


_EMPTY_RULESET = RuleSet(head=-1)


def evaluate(g: KnowledgeGraph, models: Mapping[int, RuleSet], facts,
             filter_index: FilterIndex, policy: TiePolicy,
             num_entities: Optional[int] = None,
             cache: Optional[ReachCache] = None) -> Metrics:
    """Two-sided filtered ranking of ``facts`` against rule-set models.

    Relations without a model fall back to the empty rule set (all scores
    zero).  Each query draws its rank from an RNG stream derived from
    (policy seed, fact index, direction).
    """
    E = num_entities if num_entities is not None else g.num_entities
    total = _Accum()
    by_rel: dict[int, _Accum] = {}
    for fi, (t, r, h) in enumerate(facts):
        rs = models.get(r, _EMPTY_RULESET)
        rel_acc = by_rel.setdefault(r, _Accum())
        for direction in (0, 1):
            if direction == 0:
                scores = score_all_tails(g, rs, t, cache)
                known = filter_index.known_heads(t, r)
                target = h
            else:
                scores = score_all_heads(g, rs, h, cache)
                known = filter_index.known_tails(h, r)
                target = t
            excluded = {v for v in known if v != target}
            n_greater, n_equal = _tie_counts(scores, target, excluded,
                                             E - len(excluded))
            rng = None
            if policy.kind == "random-break" and n_equal:
                rng = np.random.default_rng(
                    derive_seed(policy.seed, fi, direction))
            rank = rank_from_counts(n_greater, n_equal, policy.kind, rng)
            total.add(rank)
            rel_acc.add(rank)
    result = total.metrics()
    result.per_relation = {r: acc.metrics() for r, acc in by_rel.items()}
    return result


def evaluate_inductive(models: Mapping[int, RuleSet], train_relations: Vocab,
                       inductive_graph: KnowledgeGraph,
                       inductive_relations: Vocab, facts,
                       filter_index: FilterIndex,
                       policy: TiePolicy) -> Metrics:
    """Evaluate trained rules on a graph with unseen entities.

    Rules are entity independent, so they transfer by relation token; a
    rule mentioning a relation the inference graph lacks simply never
    fires.  Grounding, filtering and candidates all come from the
    inductive side.
    """
    from .rules import remap_ruleset

    remapped: dict[int, RuleSet] = {}
    for r, rs in models.items():
        token = train_relations.name(r)
        dst = inductive_relations.id_of(token)
        if dst is not None:
            remapped[dst] = remap_ruleset(
                rs, train_relations, inductive_relations,
                inductive_graph.num_base_relations, dst)
    return evaluate(inductive_graph, remapped, facts, filter_index, policy)

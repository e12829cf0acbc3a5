"""Candidate rule generation.

Two bootstrap generators seed the per-relation LP: short-body enumeration
(lengths one and two) and shortest-path derivation per edge.  A third,
dual-guided variant of the path generator prices new columns during
iterative LP growth, visiting the least-explained edges first.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .kg import KnowledgeGraph
from .lp import reduced_cost
from .paths import kernels
from .rules import Clause, RuleColumn, coverage_column, neg_count

REDUCED_COST_TOL = 1e-7


def make_column(g: KnowledgeGraph, r: int, clause: Clause,
                sample_frac: float = 1.0, seed: int = 0) -> RuleColumn:
    """Full LP column of a candidate clause for head relation r."""
    return RuleColumn(
        clause=clause,
        coverage=coverage_column(g, r, clause),
        neg=neg_count(g, r, clause, sample_frac, seed),
        complexity=clause.complexity,
    )


def heuristic1(g: KnowledgeGraph, r: int, min_support: int = 1) -> list[Clause]:
    """Length-one and length-two bodies that explain enough edges.

    A body counts toward an edge when it holds with that edge excluded from
    its own grounding, so the trivial body [r] never qualifies and is also
    dropped from the length-one alphabet outright; [r reversed] stays (it
    captures symmetric relations).  Length-two bodies range over the full
    label alphabet.  Bodies covering fewer than ``min_support`` edges are
    discarded.
    """
    tails, heads = g.edges(r)
    support1: dict[int, int] = {}
    support2: dict[tuple[int, int], int] = {}
    for t, h in zip(tails, heads):
        t, h = int(t), int(h)
        if t == h:
            continue
        for lab in kernels.edge_labels(g.indptr, g.nbrs, g.num_labels, t, h):
            if lab != r:
                support1[lab] = support1.get(lab, 0) + 1
        for pair in kernels.two_hop_bodies(g.indptr, g.nbrs, g.num_labels,
                                           t, h):
            support2[pair] = support2.get(pair, 0) + 1
    out = [Clause((lab,)) for lab in sorted(support1)
           if support1[lab] >= min_support]
    out += [Clause(pair) for pair in sorted(support2)
            if support2[pair] >= min_support]
    return out


def _paths_for_edge(g: KnowledgeGraph, t: int, h: int, r: int,
                    max_len: int) -> list[Clause]:
    """Shortest-path clause for one edge, plus one clause a hop longer.

    Searches the graph with the edge itself removed.  Ties between
    equal-length paths break deterministically: the depth-first expansion
    tries labels in ascending order and neighbors in ascending id order at
    every hop, and the first completed path wins.
    """
    if t == h:
        return []
    excl = (t, h, r, r + g.num_base_relations)
    dist_h = kernels.bfs_dists(g.indptr, g.nbrs, g.num_labels,
                               g.num_entities, h, excl)
    sp = int(dist_h[t])
    if sp < 1 or sp > max_len:
        return []
    out = []
    first = kernels.lex_path(g.indptr, g.nbrs, g.num_labels, t, h, sp,
                             excl, dist_h)
    if first is not None:
        out.append(Clause(tuple(int(x) for x in first)))
    if sp + 1 <= max_len:
        second = kernels.lex_path(g.indptr, g.nbrs, g.num_labels, t, h,
                                  sp + 1, excl, dist_h)
        if second is not None:
            out.append(Clause(tuple(int(x) for x in second)))
    return out


def heuristic2(g: KnowledgeGraph, r: int, max_len: int) -> list[Clause]:
    """Per-edge shortest-path clauses, deduplicated across edges.

    For every edge of relation r, one shortest simple path between its
    endpoints (the edge itself excluded) yields a clause, and one simple
    path exactly one hop longer yields a second when it exists within
    ``max_len``.  Edges whose endpoints disconnect under exclusion
    contribute nothing.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    tails, heads = g.edges(r)
    out: dict[Clause, None] = {}
    for t, h in zip(tails, heads):
        for clause in _paths_for_edge(g, int(t), int(h), r, max_len):
            out.setdefault(clause)
    return list(out)


def price_rules(g: KnowledgeGraph, r: int, duals: np.ndarray, lam: float,
                tau: float, existing: Iterable[Clause], max_new: int = 10,
                max_len: int = 4, sample_frac: float = 1.0, seed: int = 0,
                tol: float = REDUCED_COST_TOL
                ) -> list[tuple[Clause, RuleColumn]]:
    """Derive new negative-reduced-cost columns, guided by the duals.

    Edges are visited in decreasing dual-value order (the least-explained
    first); each contributes its shortest-path clauses.  A novel clause is
    kept only if its full column prices out strictly negative.  Stops after
    ``max_new`` acceptances.
    """
    tails, heads = g.edges(r)
    order = np.argsort(-np.asarray(duals), kind="stable")
    accepted: list[tuple[Clause, RuleColumn]] = []
    known: set[Clause] = set(existing)
    seen: set[Clause] = set()
    for i in order:
        if len(accepted) >= max_new:
            break
        for clause in _paths_for_edge(g, int(tails[i]), int(heads[i]), r,
                                      max_len):
            if clause in known or clause in seen:
                continue
            seen.add(clause)
            col = make_column(g, r, clause, sample_frac, seed)
            if reduced_cost(col, duals, lam, tau) < -tol:
                accepted.append((clause, col))
                if len(accepted) >= max_new:
                    break
    return accepted

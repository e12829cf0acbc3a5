"""Knowledge graph storage: triple loading, interning, adjacency indexes.

A loaded graph doubles every relation with its reverse: for base relations
0..n-1, label r+n traverses the same edges backwards.  All traversal code
works on the 2n-label alphabet.  Graphs are immutable once built and safe
to share across worker processes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np


class TripleFormatError(ValueError):
    """A triple file line does not have exactly three tab-separated fields."""

    def __init__(self, path: str, line_no: int, line: str):
        super().__init__(f"{path}:{line_no}: expected 3 tab-separated fields, "
                         f"got {line!r}")
        self.path = path
        self.line_no = line_no


class Fact(NamedTuple):
    """One directed labeled edge: relation(tail, head) holds."""

    tail: int
    relation: int
    head: int


class Vocab:
    """Dense string interning; ids are assigned in first-seen order."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, name: str) -> int:
        i = self._ids.get(name)
        if i is None:
            i = len(self._names)
            self._ids[name] = i
            self._names.append(name)
        return i

    def id_of(self, name: str) -> Optional[int]:
        return self._ids.get(name)

    def name(self, i: int) -> str:
        return self._names[i]

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def names(self) -> list[str]:
        return list(self._names)


def load_triples(path: str, entities: Vocab, relations: Vocab) -> list[Fact]:
    """Read a subject<TAB>relation<TAB>object file into facts.

    The subject is the edge tail and the object the head, so a line encodes
    relation(subject, object).  Entities and relations are interned on first
    sight.  Empty lines are skipped; a line with the wrong field count raises
    :class:`TripleFormatError` with its line number.
    """
    facts: list[Fact] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise TripleFormatError(path, line_no, line)
            subj, rel, obj = parts
            facts.append(Fact(entities.intern(subj),
                              relations.intern(rel),
                              entities.intern(obj)))
    return facts


class KnowledgeGraph:
    """Immutable labeled multigraph with per-(node, label) sorted adjacency.

    Adjacency is stored as one flat CSR structure indexed by
    ``node * num_labels + label`` so the traversal kernels can run over raw
    arrays.  ``edges(r)`` exposes the deduplicated edge list of a base
    relation in first-occurrence order; row i of that list is the i-th
    coverage constraint of the relation's selection LP.
    """

    def __init__(self, num_entities: int, num_base_relations: int,
                 indptr: np.ndarray, nbrs: np.ndarray,
                 tails_by_relation: list[np.ndarray],
                 heads_by_relation: list[np.ndarray]):
        self.num_entities = num_entities
        self.num_base_relations = num_base_relations
        self.num_labels = 2 * num_base_relations
        self.indptr = indptr
        self.nbrs = nbrs
        self._tails = tails_by_relation
        self._heads = heads_by_relation

    def reverse(self, rel: int) -> int:
        n = self.num_base_relations
        return rel + n if rel < n else rel - n

    def neighbors(self, node: int, rel: int) -> np.ndarray:
        """Distinct successors of ``node`` under ``rel``, ascending."""
        if not (0 <= node < self.num_entities):
            raise ValueError(f"entity id {node} out of range")
        if not (0 <= rel < self.num_labels):
            raise ValueError(f"relation label {rel} out of range")
        base = node * self.num_labels + rel
        return self.nbrs[self.indptr[base]:self.indptr[base + 1]]

    def has_edge(self, u: int, rel: int, v: int) -> bool:
        nb = self.neighbors(u, rel)
        i = int(np.searchsorted(nb, v))
        return i < len(nb) and nb[i] == v

    def edges(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        """(tails, heads) arrays of base relation ``r``, deduplicated."""
        if not (0 <= r < self.num_base_relations):
            raise ValueError(f"base relation id {r} out of range")
        return self._tails[r], self._heads[r]

    def num_edges(self, r: int) -> int:
        return len(self._tails[r])


def build_graph(facts: Iterable[Fact], num_entities: int,
                num_base_relations: int) -> KnowledgeGraph:
    """Index training facts, adding the reverse realization of every edge.

    Duplicate triples collapse to one edge.  Facts must use base relation
    ids; the reverse labels n..2n-1 are derived here.
    """
    n = num_base_relations
    num_labels = 2 * n
    adj: dict[int, set[int]] = {}
    edge_sets: list[dict[tuple[int, int], None]] = [dict() for _ in range(n)]
    for t, r, h in facts:
        if not (0 <= r < n):
            raise ValueError(f"fact relation {r} is not a base relation id")
        edge_sets[r].setdefault((t, h))
        adj.setdefault(t * num_labels + r, set()).add(h)
        adj.setdefault(h * num_labels + r + n, set()).add(t)

    indptr = np.zeros(num_entities * num_labels + 1, dtype=np.int64)
    for key, targets in adj.items():
        indptr[key + 1] = len(targets)
    np.cumsum(indptr, out=indptr)
    nbrs = np.empty(int(indptr[-1]), dtype=np.int32)
    for key, targets in adj.items():
        lo, hi = indptr[key], indptr[key + 1]
        nbrs[lo:hi] = sorted(targets)

    tails = [np.fromiter((t for t, _ in es), dtype=np.int32, count=len(es))
             for es in edge_sets]
    heads = [np.fromiter((h for _, h in es), dtype=np.int32, count=len(es))
             for es in edge_sets]
    return KnowledgeGraph(num_entities, n, indptr, nbrs, tails, heads)


class FilterIndex:
    """Exact membership index over every known fact, for filtered ranking."""

    def __init__(self, facts: Iterable[Fact]):
        self.known = frozenset((f.tail, f.relation, f.head) for f in facts)
        by_tail: dict[tuple[int, int], set[int]] = {}
        by_head: dict[tuple[int, int], set[int]] = {}
        for t, r, h in self.known:
            by_tail.setdefault((t, r), set()).add(h)
            by_head.setdefault((h, r), set()).add(t)
        self._by_tail = by_tail
        self._by_head = by_head

    def known_heads(self, t: int, r: int) -> set[int]:
        return self._by_tail.get((t, r), _EMPTY_SET)

    def known_tails(self, h: int, r: int) -> set[int]:
        return self._by_head.get((h, r), _EMPTY_SET)

    def __contains__(self, fact: tuple[int, int, int]) -> bool:
        return fact in self.known


_EMPTY_SET: frozenset[int] = frozenset()


def filtered_candidates(index: FilterIndex,
                        query: tuple[Optional[int], int, Optional[int]],
                        target: int, num_entities: int) -> set[int]:
    """Candidate entities for a query under the filtered protocol.

    ``query`` is (t, r, None) for a head query or (None, r, h) for a tail
    query.  Every entity except the *other* known true answers is a
    candidate; the target itself is always kept.
    """
    t, r, h = query
    if (t is None) == (h is None):
        raise ValueError("query must fix exactly one endpoint")
    if t is not None:
        known = index.known_heads(t, r)
    else:
        known = index.known_tails(h, r)
    cands = set(range(num_entities))
    cands.difference_update(known)
    cands.add(target)
    return cands


@dataclass
class Dataset:
    """A benchmark directory: train/valid/test splits plus intern tables."""

    entities: Vocab
    relations: Vocab
    train: list[Fact]
    valid: list[Fact]
    test: list[Fact]
    path: str = ""
    _graph: Optional[KnowledgeGraph] = field(default=None, repr=False)
    _filter: Optional[FilterIndex] = field(default=None, repr=False)

    @classmethod
    def load(cls, directory: str) -> "Dataset":
        """Load train.txt/valid.txt/test.txt from ``directory``.

        All three splits contribute to the intern tables (test-only entities
        are still ranking candidates) but only training facts become edges.
        """
        entities, relations = Vocab(), Vocab()
        splits = []
        for name in ("train.txt", "valid.txt", "test.txt"):
            p = os.path.join(directory, name)
            if not os.path.exists(p):
                raise FileNotFoundError(f"missing split file: {p}")
            splits.append(load_triples(p, entities, relations))
        return cls(entities, relations, *splits, path=directory)

    @property
    def graph(self) -> KnowledgeGraph:
        if self._graph is None:
            self._graph = build_graph(self.train, len(self.entities),
                                      len(self.relations))
        return self._graph

    @property
    def filter_index(self) -> FilterIndex:
        if self._filter is None:
            self._filter = FilterIndex(self.train + self.valid + self.test)
        return self._filter

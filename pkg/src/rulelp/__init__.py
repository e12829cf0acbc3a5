"""Compact weighted chain-rule learning for knowledge graph completion.

Learns, per head relation, a small weighted set of relational-path rules by
solving a penalty/complexity linear program over candidate rules generated
by path heuristics, optionally growing the candidate pool through negative
reduced-cost pricing.  Ships a filtered-ranking evaluation harness (MRR,
Hits@k) with transductive and inductive modes.
"""

from .kg import (Dataset, Fact, FilterIndex, KnowledgeGraph, Vocab,
                 build_graph, filtered_candidates, load_triples)
from .paths import BACKEND
from .rules import (Clause, Rule, RuleColumn, RuleSet, clause_holds,
                    coverage_column, neg_count, reachable_set, remap_ruleset,
                    reverse_clause, score, score_all_heads, score_all_tails)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Clause",
    "Dataset",
    "Fact",
    "FilterIndex",
    "KnowledgeGraph",
    "Rule",
    "RuleColumn",
    "RuleSet",
    "Vocab",
    "build_graph",
    "clause_holds",
    "coverage_column",
    "filtered_candidates",
    "load_triples",
    "neg_count",
    "reachable_set",
    "remap_ruleset",
    "reverse_clause",
    "score",
    "score_all_heads",
    "score_all_tails",
    "__version__",
]

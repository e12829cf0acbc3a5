"""End-to-end per-relation training.

For one head relation: generate candidate clauses, build their LP columns,
optionally grow the pool by dual-guided pricing rounds, then grid-search
the penalty tradeoff and complexity budget against validation MRR, and
solve once more at the winner.  Relations train independently and can run
in parallel worker processes; all randomness is derived per relation, so
results do not depend on scheduling.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .heuristics import heuristic1, heuristic2, make_column, price_rules
from .kg import Dataset, Fact, FilterIndex, KnowledgeGraph, Vocab
from .lp import OPT_TOL, WEIGHT_EPS, build_lpr, extract_ruleset, solve
from .ranking import TiePolicy, evaluate
from .rules import Clause, ReachCache, Rule, RuleColumn, RuleSet
from .util import derive_seed

SCENARIOS = (None, "B", "C", "D")

PRESETS: dict[str, dict] = {
    "kinship": {
        "tau_grid": (0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05, 0.055,
                     0.06),
        "max_rule_len": 4,
    },
    "umls": {
        "tau_grid": (0.0055, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09,
                     0.1),
        "max_rule_len": 4,
    },
    "wn18rr": {
        "tau_grid": (0.0025, 0.003, 0.0035, 0.004, 0.0045),
        "max_rule_len": 6,
    },
    "fb15k237": {
        "tau_grid": (0.005, 0.01, 0.025, 0.05, 0.1, 0.25),
        "max_rule_len": 4,
    },
    "yago3-10": {
        "tau_grid": (0.005, 0.01, 0.03, 0.05, 0.07),
        "max_rule_len": 3,
        "max_iter": 15,
        "skip_initial_heuristics": True,
    },
}


class TrainError(RuntimeError):
    pass


class RuleFileError(ValueError):
    def __init__(self, path: str, line_no: int, msg: str):
        super().__init__(f"{path}:{line_no}: {msg}")
        self.path = path
        self.line_no = line_no


@dataclass(frozen=True)
class TrainConfig:
    tau_grid: tuple[float, ...]
    max_rule_len: int = 4
    max_iter: int = 0
    rules_per_iter: int = 10
    neg_sample_frac: float = 1.0
    kappa_steps: int = 20
    seed: int = 0
    min_support: int = 1
    scenario: Optional[str] = None
    external_rules: Optional[str] = None
    workers: int = 0  # 0 = all available cores, 1 = in-process
    skip_initial_heuristics: bool = False
    large_relation_threshold: int = 100_000
    large_relation_sample_frac: float = 0.02
    weight_eps: float = WEIGHT_EPS
    reduced_cost_tol: float = 1e-7

    def __post_init__(self) -> None:
        if not self.tau_grid:
            raise ValueError("tau_grid must be nonempty")
        if any(t <= 0 for t in self.tau_grid):
            raise ValueError("tau values must be positive")
        if list(self.tau_grid) != sorted(self.tau_grid):
            raise ValueError("tau_grid must be ascending")
        if self.max_rule_len < 1:
            raise ValueError("max_rule_len must be at least 1")
        if not (0.0 < self.neg_sample_frac <= 1.0):
            raise ValueError("neg_sample_frac must lie in (0, 1]")
        if self.kappa_steps < 1:
            raise ValueError("kappa_steps must be at least 1")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS[1:]}")

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "TrainConfig":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; "
                             f"choose from {sorted(PRESETS)}")
        merged = dict(PRESETS[name])
        merged.update(overrides)
        return cls(**merged)


@dataclass
class RelationModel:
    head: int
    ruleset: RuleSet
    best_tau: Optional[float] = None
    best_kappa: Optional[float] = None
    validation_mrr: Optional[float] = None
    columns: Optional[list[RuleColumn]] = None  # kept only on request

    @property
    def complexity(self) -> int:
        return self.ruleset.complexity


def kappa_grid(clauses: Sequence[Clause], kappa_steps: int) -> list[int]:
    """Budget grid: multiples of (longest candidate body + 1)."""
    if not clauses:
        raise ValueError("cannot size a budget grid from an empty pool")
    base = max(len(c) for c in clauses) + 1
    return [base * i for i in range(1, kappa_steps + 1)]


def _effective_neg_frac(config: TrainConfig, num_edges: int) -> float:
    """Exact counts by default; sampled on very large relations."""
    if (config.neg_sample_frac >= 1.0
            and num_edges > config.large_relation_threshold):
        return config.large_relation_sample_frac
    return config.neg_sample_frac


def _validation_mrr(g: KnowledgeGraph, r: int, rs: RuleSet,
                    valid_facts: Sequence[Fact], filter_index: FilterIndex,
                    seed: int, cache: Optional[ReachCache]) -> float:
    policy = TiePolicy("random-break", seed)
    metrics = evaluate(g, {r: rs}, valid_facts, filter_index, policy,
                       cache=cache)
    return metrics.mrr


def _initial_pool(g: KnowledgeGraph, r: int, config: TrainConfig,
                  external_bodies: Optional[Sequence[Clause]]) -> list[Clause]:
    pool: dict[Clause, None] = {}
    if config.scenario == "C":
        for c in external_bodies or ():
            pool.setdefault(c)
        return list(pool)
    if config.scenario == "D":
        for c in external_bodies or ():
            pool.setdefault(c)
    if not config.skip_initial_heuristics:
        for c in heuristic1(g, r, config.min_support):
            pool.setdefault(c)
        for c in heuristic2(g, r, config.max_rule_len):
            pool.setdefault(c)
    return list(pool)


def train_relation(g: KnowledgeGraph, r: int, valid_facts: Sequence[Fact],
                   config: TrainConfig, filter_index: FilterIndex,
                   external: Optional[Sequence[tuple[Clause, float]]] = None,
                   keep_columns: bool = False) -> RelationModel:
    """Candidate generation, pricing rounds, and grid search for one relation.

    ``external`` supplies imported (clause, weight) pairs for the external
    rule scenarios; pass-through mode (scenario B) returns them as the model
    without touching the LP.
    """
    if config.scenario == "B":
        rs = RuleSet(head=r, rules=[Rule(c, w) for c, w in external or ()])
        return RelationModel(head=r, ruleset=rs)

    m = g.num_edges(r)
    if m == 0:
        return RelationModel(head=r, ruleset=RuleSet(head=r))
    external_bodies = [c for c, _ in external] if external else None
    pool = _initial_pool(g, r, config, external_bodies)
    frac = _effective_neg_frac(config, m)
    neg_seed = derive_seed(config.seed, "neg", r)
    columns = [make_column(g, r, c, frac, neg_seed) for c in pool]

    tau_min = config.tau_grid[0]
    # budget used while growing the pool; the grid is re-derived afterwards
    kappa_cg = (max(len(c) for c in pool) + 1) if pool \
        else config.max_rule_len + 1

    prev_obj = math.inf
    if columns or config.max_iter > 0:
        sol = solve(build_lpr(columns, tau_min, kappa_cg, m))
        prev_obj = sol.objective
        for _ in range(config.max_iter):
            priced = price_rules(
                g, r, sol.delta, sol.lam, tau_min, pool,
                max_new=config.rules_per_iter, max_len=config.max_rule_len,
                sample_frac=frac, seed=neg_seed,
                tol=config.reduced_cost_tol)
            if not priced:
                break
            for clause, col in priced:
                pool.append(clause)
                columns.append(col)
            sol = solve(build_lpr(columns, tau_min, kappa_cg, m))
            if sol.objective > prev_obj + OPT_TOL * (1 + abs(prev_obj)):
                raise TrainError(
                    f"objective increased while adding columns for relation "
                    f"{r}: {prev_obj} -> {sol.objective}")
            prev_obj = sol.objective

    if not pool:
        rs = RuleSet(head=r)
        mrr = None
        if valid_facts:
            mrr = _validation_mrr(g, r, rs, valid_facts, filter_index,
                                  derive_seed(config.seed, "valid", r, 0, 0),
                                  None)
        return RelationModel(head=r, ruleset=rs, validation_mrr=mrr,
                             columns=[] if keep_columns else None)

    kgrid = kappa_grid(pool, config.kappa_steps)
    cache: ReachCache = {}
    best_tau, best_kappa, best_mrr = None, None, None
    if valid_facts:
        for ti, tau in enumerate(config.tau_grid):
            for ki, kappa in enumerate(kgrid):
                sol = solve(build_lpr(columns, tau, kappa, m))
                rs = extract_ruleset(sol, pool, r, config.weight_eps)
                mrr = _validation_mrr(
                    g, r, rs, valid_facts, filter_index,
                    derive_seed(config.seed, "valid", r, ti, ki), cache)
                better = (best_mrr is None or mrr > best_mrr
                          or (mrr == best_mrr and kappa < best_kappa)
                          or (mrr == best_mrr and kappa == best_kappa
                              and tau < best_tau))
                if better:
                    best_tau, best_kappa, best_mrr = tau, kappa, mrr
    else:
        # nothing to select on: fall back to the smallest budget and tradeoff
        best_tau, best_kappa, best_mrr = tau_min, kgrid[0], None

    final = solve(build_lpr(columns, best_tau, best_kappa, m))
    rs = extract_ruleset(final, pool, r, config.weight_eps)
    return RelationModel(head=r, ruleset=rs, best_tau=best_tau,
                         best_kappa=float(best_kappa),
                         validation_mrr=best_mrr,
                         columns=columns if keep_columns else None)


_WORKER: dict = {}


def _worker_init(g, valid_by_rel, config, filter_index, external,
                 keep_columns):
    _WORKER.update(g=g, valid=valid_by_rel, config=config,
                   filter_index=filter_index, external=external,
                   keep_columns=keep_columns)


def _worker_train(r: int):
    try:
        model = train_relation(
            _WORKER["g"], r, _WORKER["valid"].get(r, ()), _WORKER["config"],
            _WORKER["filter_index"],
            external=(_WORKER["external"] or {}).get(r),
            keep_columns=_WORKER["keep_columns"])
        return r, model, None
    except Exception as exc:  # noqa: BLE001 - reported with relation id
        return r, None, f"{type(exc).__name__}: {exc}"


def train_all(dataset: Dataset, config: TrainConfig,
              external: Optional[dict[int, list[tuple[Clause, float]]]] = None,
              keep_columns: bool = False,
              log=None) -> dict[int, RelationModel]:
    """Train every relation with training edges; others get empty models.

    Relations run on a worker pool (``config.workers``; 0 means all cores,
    1 forces in-process execution).  Failures are collected per relation and
    re-raised together after the rest complete.
    """
    g = dataset.graph
    filter_index = dataset.filter_index
    valid_by_rel: dict[int, list[Fact]] = {}
    for f in dataset.valid:
        valid_by_rel.setdefault(f.relation, []).append(f)

    trainable = [r for r in range(g.num_base_relations) if g.num_edges(r)]
    if config.scenario in ("B", "C") and external is not None:
        trainable = [r for r in trainable if r in external]

    models: dict[int, RelationModel] = {}
    failures: list[tuple[int, str]] = []
    if config.workers == 1 or len(trainable) <= 1:
        _worker_init(g, valid_by_rel, config, filter_index, external,
                     keep_columns)
        results = map(_worker_train, trainable)
        for r, model, err in results:
            if err is not None:
                failures.append((r, err))
            else:
                models[r] = model
                if log:
                    log(r, model)
    else:
        workers = config.workers or None
        with ProcessPoolExecutor(
                max_workers=workers, initializer=_worker_init,
                initargs=(g, valid_by_rel, config, filter_index, external,
                          keep_columns)) as pool:
            for r, model, err in pool.map(_worker_train, trainable):
                if err is not None:
                    failures.append((r, err))
                else:
                    models[r] = model
                    if log:
                        log(r, model)
    if failures:
        details = "; ".join(f"relation {r}: {msg}" for r, msg in failures)
        raise TrainError(f"training failed for {len(failures)} relation(s): "
                         f"{details}")

    for f in dataset.test:
        if f.relation not in models:
            models[f.relation] = RelationModel(
                head=f.relation, ruleset=RuleSet(head=f.relation))
    return dict(sorted(models.items()))


# ---------------------------------------------------------------------------
# Rule exchange format: one rule per line,
#   weight <TAB> head-token <TAB> body-token[,body-token...]
# where a body token "R_x" or "x^-1" means the reverse of relation x.


def _resolve_body_token(token: str, relations: Vocab,
                        num_base: int) -> Optional[int]:
    rid = relations.id_of(token)
    if rid is not None:
        return rid
    if token.startswith("R_"):
        rid = relations.id_of(token[2:])
        if rid is not None:
            return rid + num_base
    if token.endswith("^-1"):
        rid = relations.id_of(token[:-3])
        if rid is not None:
            return rid + num_base
    return None


def import_rules(path: str, scenario: Optional[str], relations: Vocab
                 ) -> dict[int, list[tuple[Clause, float]]]:
    """Parse a rule-exchange file against the dataset's relation table.

    Scenario B keeps the stated weights (clamped into [0, 1] with a
    warning); scenarios C and D drop them, since the LP recomputes weights,
    and deduplicate bodies per head relation.
    """
    num_base = len(relations)
    out: dict[int, list[tuple[Clause, float]]] = {}
    seen: dict[int, set[Clause]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise RuleFileError(path, line_no,
                                    "expected 3 tab-separated fields")
            try:
                weight = float(parts[0])
            except ValueError:
                raise RuleFileError(path, line_no,
                                    f"bad weight {parts[0]!r}") from None
            head = relations.id_of(parts[1])
            if head is None:
                raise RuleFileError(path, line_no,
                                    f"unknown relation token {parts[1]!r}")
            body = []
            for token in parts[2].split(","):
                rel = _resolve_body_token(token.strip(), relations, num_base)
                if rel is None:
                    raise RuleFileError(path, line_no,
                                        f"unknown relation token {token!r}")
                body.append(rel)
            clause = Clause(tuple(body))
            if scenario == "B":
                if not (0.0 <= weight <= 1.0):
                    warnings.warn(
                        f"{path}:{line_no}: weight {weight} clamped to [0,1]",
                        stacklevel=2)
                    weight = min(max(weight, 0.0), 1.0)
                out.setdefault(head, []).append((clause, weight))
            else:
                if clause not in seen.setdefault(head, set()):
                    seen[head].add(clause)
                    out.setdefault(head, []).append((clause, 1.0))
    return out


def format_rule(weight: float, head: int, clause: Clause,
                relations: Vocab) -> str:
    num_base = len(relations)
    tokens = []
    for rel in clause.body:
        if rel < num_base:
            tokens.append(relations.name(rel))
        else:
            tokens.append("R_" + relations.name(rel - num_base))
    return f"{weight!r}\t{relations.name(head)}\t{','.join(tokens)}"


def export_rules(models: dict[int, RelationModel], relations: Vocab,
                 path: str) -> None:
    """Write all models to the exchange format, sorted by relation id."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in sorted(models):
            for rule in models[r].ruleset.rules:
                fh.write(format_rule(rule.weight, r, rule.clause, relations)
                         + "\n")

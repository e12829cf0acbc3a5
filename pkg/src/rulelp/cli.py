"""Command-line interface: train, eval, reweight, sweep.

Every command echoes its resolved configuration into its output artifact,
and re-running with the same inputs and seed reproduces the artifact byte
for byte (wall-clock timings go to stdout only).  Flags can also be set
through environment variables prefixed ``RULELP_`` (for example
``RULELP_TRAIN_SEED=7``).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import sys
import time
from typing import Optional

import click

from .kg import Dataset
from .lp import build_lpr, extract_ruleset, solve
from .ranking import POLICIES, TiePolicy, evaluate, evaluate_inductive
from .rules import Rule, RuleSet
from .train import (PRESETS, RelationModel, TrainConfig, export_rules,
                    import_rules, train_all)
from .util import derive_seed


@click.group()
def cli() -> None:
    """Learn and evaluate weighted chain rules for KG completion."""


def _train_options(fn):
    opts = [
        click.option("--preset", type=click.Choice(sorted(PRESETS)),
                     default=None, help="Named hyperparameter bundle."),
        click.option("--tau", "taus", type=float, multiple=True,
                     help="Penalty tradeoff grid value (repeatable)."),
        click.option("--max-rule-len", type=int, default=None),
        click.option("--max-iter", type=int, default=None,
                     help="Column-generation rounds."),
        click.option("--rules-per-iter", type=int, default=None),
        click.option("--neg-sample-frac", type=float, default=None),
        click.option("--kappa-steps", type=int, default=None),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--workers", type=int, default=0,
                     help="Worker processes; 0 = all cores."),
        click.option("--min-support", type=int, default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _resolve_config(preset, taus, scenario=None, external_rules=None,
                    **flags) -> TrainConfig:
    base: dict = dict(PRESETS[preset]) if preset else {}
    if taus:
        base["tau_grid"] = tuple(sorted(taus))
    if "tau_grid" not in base:
        raise click.UsageError("provide --preset or at least one --tau")
    for key, value in flags.items():
        if value is not None:
            base[key] = value
    base["scenario"] = scenario
    base["external_rules"] = external_rules
    try:
        return TrainConfig(**base)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _config_echo(config: TrainConfig, dataset: Dataset,
                 preset: Optional[str]) -> dict:
    echo = dataclasses.asdict(config)
    echo["data"] = dataset.path
    echo["preset"] = preset
    echo["seed_streams"] = {
        "negative_sampling": "derive_seed(seed, 'neg', relation)",
        "validation_ranking": "derive_seed(seed, 'valid', relation, "
                              "tau_index, kappa_index)",
        "test_ranking": "derive_seed(seed, fact_index, direction)",
    }
    return echo


def _write_sidecar(path: str, models: dict[int, RelationModel],
                   dataset: Dataset, config: TrainConfig,
                   preset: Optional[str]) -> None:
    trained = {r: m for r, m in models.items()
               if dataset.graph.num_edges(r) > 0}
    per_relation = {
        dataset.relations.name(r): {
            "best_tau": m.best_tau,
            "best_kappa": m.best_kappa,
            "validation_mrr": m.validation_mrr,
            "complexity": m.complexity,
            "num_rules": len(m.ruleset),
            "neg_seed": derive_seed(config.seed, "neg", r),
        }
        for r, m in sorted(models.items())
    }
    payload = {
        "config": _config_echo(config, dataset, preset),
        "relations": per_relation,
        "avg_rules_per_relation": _avg_rules(trained),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _avg_rules(models: dict[int, RelationModel]) -> float:
    if not models:
        return 0.0
    return sum(len(m.ruleset) for m in models.values()) / len(models)


def _load_external(path: Optional[str], scenario: Optional[str],
                   dataset: Dataset):
    if path is None:
        if scenario is not None:
            raise click.UsageError(
                "--scenario requires --external-rules")
        return None
    return import_rules(path, scenario, dataset.relations)


@cli.command()
@click.option("--data", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--scenario", type=click.Choice(["B", "C", "D"]), default=None)
@click.option("--external-rules", type=click.Path(exists=True), default=None)
@_train_options
def train(data, out, scenario, external_rules, preset, taus, seed, workers,
          **flags) -> None:
    """Learn rule sets for every relation and write a model file."""
    config = _resolve_config(preset, taus, scenario, external_rules,
                             seed=seed, workers=workers, **flags)
    dataset = Dataset.load(data)
    external = _load_external(external_rules, scenario, dataset)
    start = time.monotonic()

    def log(r: int, model: RelationModel) -> None:
        mrr = ("-" if model.validation_mrr is None
               else f"{model.validation_mrr:.4f}")
        click.echo(f"  {dataset.relations.name(r)}: "
                   f"{len(model.ruleset)} rules, tau={model.best_tau}, "
                   f"kappa={model.best_kappa}, valid-mrr={mrr}")

    models = train_all(dataset, config, external=external, log=log)
    export_rules(models, dataset.relations, out)
    _write_sidecar(out + ".json", models, dataset, config, preset)
    trained = {r: m for r, m in models.items()
               if dataset.graph.num_edges(r) > 0}
    elapsed = time.monotonic() - start
    click.echo(f"trained {len(trained)} relations in {elapsed:.1f}s; "
               f"avg rules/relation {_avg_rules(trained):.2f}")
    click.echo(f"model written to {out}")


def _models_from_file(path: str, dataset: Dataset) -> dict[int, RuleSet]:
    imported = import_rules(path, "B", dataset.relations)
    return {r: RuleSet(head=r, rules=[Rule(c, w) for c, w in pairs])
            for r, pairs in imported.items()}


@cli.command("eval")
@click.option("--data", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--ranking", type=click.Choice(POLICIES),
              default="random-break", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--inductive-graph", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Separate dataset directory providing the inference "
                   "graph, queries and filter.")
@click.option("--metrics-out", type=click.Path(dir_okay=False), default=None)
def eval_cmd(data, model_path, ranking, seed, inductive_graph,
             metrics_out) -> None:
    """Filtered two-sided ranking of the test split under a model."""
    dataset = Dataset.load(data)
    models = _models_from_file(model_path, dataset)
    policy = TiePolicy(ranking, seed)
    start = time.monotonic()
    if inductive_graph:
        ind = Dataset.load(inductive_graph)
        metrics = evaluate_inductive(models, dataset.relations, ind.graph,
                                     ind.relations, ind.test,
                                     ind.filter_index, policy)
        relations = ind.relations
    else:
        metrics = evaluate(dataset.graph, models, dataset.test,
                           dataset.filter_index, policy)
        relations = dataset.relations
    elapsed = time.monotonic() - start

    trained_rels = [r for r in range(len(dataset.relations))
                    if dataset.graph.num_edges(r) > 0]
    avg_rules = (sum(len(models.get(r, ())) for r in trained_rels)
                 / max(1, len(trained_rels)))
    payload = metrics.to_json(relations)
    payload["avg_rules_per_relation"] = avg_rules
    payload["config"] = {
        "data": data,
        "model": model_path,
        "ranking": ranking,
        "seed": seed,
        "inductive_graph": inductive_graph,
        "seed_streams": {
            "test_ranking": "derive_seed(seed, fact_index, direction)",
        },
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if metrics_out:
        with open(metrics_out, "w", encoding="utf-8") as fh:
            fh.write(text)
        click.echo(f"metrics written to {metrics_out} "
                   f"(eval took {elapsed:.1f}s)")
        click.echo(f"mrr={metrics.mrr:.4f} hits1={metrics.hits1:.4f} "
                   f"hits3={metrics.hits3:.4f} hits10={metrics.hits10:.4f}")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option("--data", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--external-rules", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", type=click.Choice(["B", "C", "D"]),
              required=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_train_options
def reweight(data, external_rules, scenario, out, preset, taus, seed,
             workers, **flags) -> None:
    """Re-select or re-weight externally mined rules.

    Scenario B converts the file into a model unchanged; C re-weights a
    selected subset under the complexity budget; D adds the heuristic
    candidates before selecting.
    """
    dataset = Dataset.load(data)
    if scenario == "B":
        imported = import_rules(external_rules, "B", dataset.relations)
        models = {
            r: RelationModel(head=r, ruleset=RuleSet(
                head=r, rules=[Rule(c, w) for c, w in pairs]))
            for r, pairs in imported.items()
        }
        export_rules(models, dataset.relations, out)
        click.echo(f"model written to {out}")
        return
    config = _resolve_config(preset, taus, scenario, external_rules,
                             seed=seed, workers=workers, **flags)
    external = import_rules(external_rules, scenario, dataset.relations)
    models = train_all(dataset, config, external=external)
    export_rules(models, dataset.relations, out)
    _write_sidecar(out + ".json", models, dataset, config, preset)
    click.echo(f"model written to {out}")


@cli.command()
@click.option("--data", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--sweep-kappa", "kappas", type=float, multiple=True,
              required=True, help="Complexity cap (repeatable).")
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="CSV output path.")
@click.option("--ranking", type=click.Choice(POLICIES),
              default="random-break", show_default=True)
@_train_options
def sweep(data, kappas, out, ranking, preset, taus, seed, workers,
          **flags) -> None:
    """Test-MRR versus rule-budget tradeoff curve.

    Trains once, then re-solves every relation's LP at its selected
    tradeoff with each requested budget cap and evaluates the test split.
    """
    config = _resolve_config(preset, taus, None, None, seed=seed,
                             workers=workers, **flags)
    dataset = Dataset.load(data)
    models = train_all(dataset, config, keep_columns=True)
    g = dataset.graph
    rows = []
    for cap in kappas:
        if cap <= 0:
            raise click.UsageError("--sweep-kappa values must be positive")
        swept: dict[int, RuleSet] = {}
        for r, model in models.items():
            if not model.columns or model.best_tau is None:
                swept[r] = RuleSet(head=r)
                continue
            sol = solve(build_lpr(model.columns, model.best_tau, cap,
                                  g.num_edges(r)))
            swept[r] = extract_ruleset(
                sol, [c.clause for c in model.columns], r, config.weight_eps)
        metrics = evaluate(g, swept, dataset.test, dataset.filter_index,
                           TiePolicy(ranking, config.seed))
        trained = [r for r in models if g.num_edges(r) > 0]
        avg_rules = sum(len(swept[r]) for r in trained) / max(1, len(trained))
        rows.append((cap, avg_rules, metrics.mrr))
        click.echo(f"kappa_cap={cap:g} avg_rules={avg_rules:.2f} "
                   f"mrr={metrics.mrr:.4f}")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kappa_cap", "avg_rules_per_relation", "test_mrr"])
        writer.writerows(rows)
    click.echo(f"sweep written to {out}")


def main() -> None:
    cli(auto_envvar_prefix="RULELP")


if __name__ == "__main__":
    main()

"""Command line front end: benchmark runs, trace replay, domain linting."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .bench import (
    CATEGORIES,
    DEFAULT_WAIT_COST,
    POLICIES,
    BenchConfig,
    run_benchmark,
)
from .domains import DomainBundle, builtin_bundle, domain_names, lint_domain, load_domain
from .momdp import PlannerConfig
from .simulator import derive_seed, model_c_for, run_episode, trace_from_doc


def _planner_options(f):
    for opt in reversed(
        [
            click.option("--depth", default=19, show_default=True, help="search horizon"),
            click.option(
                "--obs-samples", default=6, show_default=True,
                help="max observation branches per node",
            ),
            click.option("--sims", default=500, show_default=True, help="simulations per decision"),
            click.option("--ucb-c", default=5.0, show_default=True, help="exploration constant"),
            click.option("--gamma", default=0.95, show_default=True, help="discount factor"),
            click.option(
                "--wait-cost", default=DEFAULT_WAIT_COST, show_default=True,
                help="planning-only cost of waiting (reported rewards are unaffected)",
            ),
        ]
    ):
        f = opt(f)
    return f


def _planner_cfg(depth, obs_samples, sims, ucb_c, gamma, wait_cost) -> PlannerConfig:
    return PlannerConfig(
        depth=depth, obs_samples=obs_samples, sims=sims, ucb_c=ucb_c,
        gamma=gamma, wait_cost=wait_cost,
    )


@click.group()
def main():
    """Goal-recognition benchmark and domain tools."""


@main.command()
@click.option("--domain", required=True, type=click.Choice(sorted(domain_names())))
@click.option("--policy", default=",".join(POLICIES), show_default=True)
@click.option("--sr", default="0.8,0.9,0.95,0.99", show_default=True)
@click.option("--category", default="all", show_default=True)
@click.option("--trials", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--compliance", default=1.0, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--timing", is_flag=True, help="include mean decision runtime in the CSV")
@_planner_options
def run(domain, policy, sr, category, trials, seed, out, compliance, threads, timing,
        depth, obs_samples, sims, ucb_c, gamma, wait_cost):
    """Run the benchmark grid and print the metrics CSV."""
    categories = CATEGORIES if category == "all" else tuple(category.split(","))
    cfg = BenchConfig(
        domain=domain,
        policies=tuple(policy.split(",")),
        sr_grid=tuple(float(x) for x in sr.split(",")),
        categories=categories,
        trials=trials,
        seed=seed,
        planner=_planner_cfg(depth, obs_samples, sims, ucb_c, gamma, wait_cost),
        compliance=compliance,
        timing=timing,
        threads=threads,
    )
    try:
        cfg.validate()
    except ValueError as e:
        raise click.UsageError(str(e)) from e
    table = run_benchmark(cfg, out)
    click.echo(table.to_csv(), nl=False)
    if table.aborted:
        for reason in table.aborted:
            click.echo(f"aborted cell: {reason}", err=True)
        sys.exit(1)


@main.command()
@click.option("--trace", "trace_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--policy", default="d4gr", type=click.Choice(POLICIES), show_default=True)
@click.option("--sr", default=0.95, show_default=True)
@click.option("--seed", default=None, type=int, help="defaults to the trace file's seed")
@click.option("--compliance", default=1.0, show_default=True)
@_planner_options
def replay(trace_file, policy, sr, seed, compliance,
           depth, obs_samples, sims, ucb_c, gamma, wait_cost):
    """Re-run a recorded trace against a policy and print the step log."""
    doc = json.loads(Path(trace_file).read_text())
    net = load_domain(doc["domain"])
    trace = trace_from_doc(doc)
    if seed is None:
        seed = int(doc["seed"])
    planner = _planner_cfg(depth, obs_samples, sims, ucb_c, gamma, wait_cost)
    from dataclasses import replace as dc_replace

    planner = dc_replace(planner, sr=sr, c=model_c_for(trace.category))
    log = run_episode(
        net, trace, policy,
        planner_cfg=planner, sr=sr,
        noise_seed=derive_seed(seed, "noise"),
        lang_seed=derive_seed(seed, "lang", policy),
        policy_seed=derive_seed(seed, "policy", policy),
        compliance=compliance,
    )
    for line in log.to_lines():
        click.echo(line)
    click.echo(
        json.dumps(
            {"return": log.total_reward, "asks": log.n_asks, "steps": len(log.records)},
            sort_keys=True,
        )
    )


@main.command()
@click.option("--domain", "domain_ref", required=True,
              help="shipped domain name or path to a task-network JSON file")
def lint(domain_ref):
    """Validate a task-network file and report structural warnings."""
    path = Path(domain_ref)
    if path.exists():
        doc = json.loads(path.read_text())
        bundle = DomainBundle(
            name=doc.get("domain", path.stem),
            document=doc,
            expected_var_count=len(doc.get("vars", [])),
        )
    else:
        try:
            bundle = builtin_bundle(domain_ref)
        except KeyError as e:
            raise click.UsageError(str(e)) from e
    report = lint_domain(bundle)
    for w in report.warnings:
        click.echo(f"warning: {w}")
    if report.warnings:
        sys.exit(1)
    click.echo("ok")


if __name__ == "__main__":
    main()

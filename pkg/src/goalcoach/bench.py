"""Benchmark grid: paired traces, per-cell metrics, CSV and plot output.

Every policy in a cell replays the same traces and the same per-step sensor
noise stream, so metric differences are attributable to the policy alone.
All randomness is derived from the config seed with a keyed hash, never from
global state, so single-threaded runs are byte-reproducible.
"""
from __future__ import annotations

import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .domains import load_domain
from .momdp import PlannerConfig
from .simulator import (
    CATEGORIES,
    EpisodeLog,
    HumanTrace,
    derive_seed,
    generate_trace,
    model_c_for,
    run_episode,
)
from .tasknet import TaskNet

POLICIES = ("d4gr", "htn", "always-ask", "random-ask")
DEFAULT_SR_GRID = (0.8, 0.9, 0.95, 0.99)

# Planning-only shaping for benchmark runs: waiting is charged this much
# inside the search (reported rewards stay 5/0/-5), which sets how suspicious
# the agent must be before a question is worth asking. Calibrated so the
# question rate on wrong-step traces sits in the observed 0.2-0.45 band.
DEFAULT_WAIT_COST = 4.5


def _default_planner() -> PlannerConfig:
    return PlannerConfig(wait_cost=DEFAULT_WAIT_COST)

CSV_COLUMNS = (
    "policy,domain,sr,category,goal_acc,plan_acc,q_freq,return_mean,return_sd,runtime_s,trials"
)


@dataclass(frozen=True)
class BenchConfig:
    domain: str
    policies: tuple[str, ...] = POLICIES
    sr_grid: tuple[float, ...] = DEFAULT_SR_GRID
    categories: tuple[str, ...] = CATEGORIES
    trials: int = 50
    seed: int = 0
    planner: PlannerConfig = field(default_factory=_default_planner)
    compliance: float = 1.0
    timing: bool = False
    threads: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for sr in self.sr_grid:
            if not 0.5 <= sr <= 1.0:
                raise ValueError(f"sensor reliability {sr} outside [0.5, 1.0]")
        for p in self.policies:
            if p not in POLICIES:
                raise ValueError(f"unknown policy: {p!r}")
        for c in self.categories:
            if c not in CATEGORIES:
                raise ValueError(f"unknown category: {c!r}")


@dataclass(frozen=True)
class MetricsRow:
    policy: str
    domain: str
    sr: float
    category: str
    goal_acc: float
    plan_acc: float
    q_freq: float
    return_mean: float
    return_sd: float
    runtime_s: float | None
    trials: int

    def csv_line(self) -> str:
        rt = "" if self.runtime_s is None else f"{self.runtime_s:.6f}"
        return (
            f"{self.policy},{self.domain},{self.sr:g},{self.category},"
            f"{self.goal_acc:.6f},{self.plan_acc:.6f},{self.q_freq:.6f},"
            f"{self.return_mean:.6f},{self.return_sd:.6f},{rt},{self.trials}"
        )


@dataclass
class MetricsTable:
    rows: list[MetricsRow] = field(default_factory=list)
    aborted: list[str] = field(default_factory=list)  # "policy/sr/category: reason"

    def get(self, policy: str, sr: float, category: str) -> MetricsRow:
        for r in self.rows:
            if r.policy == policy and r.sr == sr and r.category == category:
                return r
        raise KeyError((policy, sr, category))

    def to_csv(self) -> str:
        lines = [CSV_COLUMNS]
        lines += [r.csv_line() for r in self.rows]
        return "\n".join(lines) + "\n"


def table_from_csv(text: str) -> MetricsTable:
    lines = [ln for ln in text.splitlines() if ln]
    if lines[0] != CSV_COLUMNS:
        raise ValueError("unrecognized CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append(
            MetricsRow(
                policy=parts[0],
                domain=parts[1],
                sr=float(parts[2]),
                category=parts[3],
                goal_acc=float(parts[4]),
                plan_acc=float(parts[5]),
                q_freq=float(parts[6]),
                return_mean=float(parts[7]),
                return_sd=float(parts[8]),
                runtime_s=float(parts[9]) if parts[9] else None,
                trials=int(parts[10]),
            )
        )
    return MetricsTable(rows=rows)


def compute_metrics(
    logs: list[EpisodeLog],
    traces: list[HumanTrace],
    *,
    policy: str,
    domain: str,
    sr: float,
    category: str,
    timing: bool = False,
) -> MetricsRow:
    if not logs:
        raise ValueError("no episode logs to aggregate")
    if len(logs) != len(traces):
        raise ValueError("logs and traces are misaligned")
    goal_hits = goal_n = plan_hits = plan_n = asks = steps = 0
    returns = []
    times = []
    for log in logs:
        for i, rec in enumerate(log.records):
            goal_n += 1
            goal_hits += rec.goal_pred == rec.goal
            if i + 1 < len(log.records):
                plan_n += 1
                plan_hits += rec.next_pred == log.records[i + 1].executed
            asks += rec.agent_action.kind == "ask"
        steps += len(log.records)
        returns.append(log.total_reward)
        times.extend(log.decision_times)
    return MetricsRow(
        policy=policy,
        domain=domain,
        sr=sr,
        category=category,
        goal_acc=goal_hits / goal_n if goal_n else 0.0,
        plan_acc=plan_hits / plan_n if plan_n else 0.0,
        q_freq=asks / steps if steps else 0.0,
        return_mean=statistics.fmean(returns),
        return_sd=statistics.stdev(returns) if len(returns) > 1 else 0.0,
        runtime_s=(statistics.fmean(times) if times and timing else None),
        trials=len(logs),
    )


def _cell_traces(net: TaskNet, cfg: BenchConfig, category: str) -> list[HumanTrace]:
    import random

    out = []
    for trial in range(cfg.trials):
        rng = random.Random(derive_seed(cfg.seed, "trace", category, trial))
        out.append(generate_trace(net, category, rng))
    return out


def _run_cell(
    net: TaskNet, cfg: BenchConfig, policy: str, sr: float, category: str,
    traces: list[HumanTrace],
) -> MetricsRow:
    planner = replace(cfg.planner, sr=sr, c=model_c_for(category))
    logs = []
    for trial, trace in enumerate(traces):
        logs.append(
            run_episode(
                net,
                trace,
                policy,
                planner_cfg=planner,
                sr=sr,
                noise_seed=derive_seed(cfg.seed, "noise", category, trial),
                lang_seed=derive_seed(cfg.seed, "lang", category, trial, policy),
                policy_seed=derive_seed(cfg.seed, "policy", category, trial, policy),
                compliance=cfg.compliance,
            )
        )
    return compute_metrics(
        logs, traces, policy=policy, domain=cfg.domain, sr=sr, category=category,
        timing=cfg.timing,
    )


def run_benchmark(cfg: BenchConfig, out_dir: str | Path | None = None) -> MetricsTable:
    cfg.validate()
    net = load_domain(cfg.domain)
    traces_by_cat = {c: _cell_traces(net, cfg, c) for c in cfg.categories}

    cells = [
        (policy, sr, category)
        for policy in cfg.policies
        for sr in cfg.sr_grid
        for category in cfg.categories
    ]
    table = MetricsTable()

    def work(cell):
        policy, sr, category = cell
        try:
            return _run_cell(net, cfg, policy, sr, category, traces_by_cat[category]), None
        except Exception as e:  # noqa: BLE001 - cell isolation by contract
            return None, f"{policy}/{sr:g}/{category}: {e}"

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]
    for row, err in results:
        if err is not None:
            table.aborted.append(err)
        else:
            table.rows.append(row)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_text(table.to_csv())
        if table.aborted:
            (out / "aborted.txt").write_text("\n".join(table.aborted) + "\n")
        write_plots(table, out)
    return table


def write_plots(table: MetricsTable, out_dir: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    metrics = ("goal_acc", "plan_acc", "q_freq", "return_mean")
    policies = sorted({r.policy for r in table.rows})
    srs = sorted({r.sr for r in table.rows})
    for metric in metrics:
        fig, ax = plt.subplots(figsize=(6, 4))
        for policy in policies:
            ys = []
            for sr in srs:
                vals = [
                    getattr(r, metric)
                    for r in table.rows
                    if r.policy == policy and r.sr == sr
                ]
                ys.append(sum(vals) / len(vals) if vals else float("nan"))
            ax.plot(srs, ys, marker="o", label=policy)
        ax.set_xlabel("sensor reliability")
        ax.set_ylabel(metric)
        ax.legend()
        fig.tight_layout()
        fig.savefig(out_dir / f"{metric}.png", dpi=120)
        plt.close(fig)

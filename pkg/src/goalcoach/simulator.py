"""Synthetic humans: scripted traces, noisy sensing, and the episode loop.

A trace scripts what the human would do unaided. During an episode the agent
watches noisy sensor vectors, may ask about the last step, and on a "no"
offers the step it believes correct; the human then follows that suggestion
with probability `compliance`.
"""
from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field

from . import belief as bel
from . import momdp
from .momdp import WAIT, AgentAction, PlannerConfig, ask
from .planner import plan_action
from .tasknet import TaskNet, apply_primitive

CATEGORIES = ("single-correct", "multi-correct", "single-wrong", "multi-wrong")
WRONG_STEP_C = 0.837  # human correctness when they are prone to mistakes
DEFAULT_C = 0.99

_MAX_TRACE_STEPS = 120
_SWITCH_PROB = 0.4


def derive_seed(*parts) -> int:
    """Stable cross-run seed from heterogeneous parts; never uses builtin hash."""
    h = hashlib.blake2b("\x1f".join(str(p) for p in parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def model_c_for(category: str) -> float:
    return WRONG_STEP_C if category.endswith("wrong") else DEFAULT_C


@dataclass(frozen=True)
class TraceStep:
    action: str
    goal: str
    is_wrong: bool


@dataclass(frozen=True)
class HumanTrace:
    category: str
    goals: tuple[str, ...]
    steps: tuple[TraceStep, ...]


def _advance(net: TaskNet, world: dict, goal: str, rng: random.Random) -> str | None:
    valid = sorted(net.valid_next_mask(net.mask_of(world), goal))
    if not valid:
        return None
    return valid[rng.randrange(len(valid))]


def generate_trace(
    net: TaskNet,
    category: str,
    rng: random.Random,
    *,
    goals: tuple[str, ...] | None = None,
    min_run: int = 2,
) -> HumanTrace:
    """Script one human run: a linearization per goal, interleaved for multi
    categories, with wrong steps substituted at rate 1 - C for wrong categories."""
    if category not in CATEGORIES:
        raise ValueError(f"unknown trace category: {category!r}")
    multi = category.startswith("multi")
    wrong = category.endswith("wrong")
    c = model_c_for(category)
    if goals is None:
        goals = _pick_goals(net, rng, 2 if multi else 1)
    elif len(goals) != (2 if multi else 1):
        raise ValueError(f"category {category!r} needs {2 if multi else 1} goal(s)")

    world = net.initial_world()
    steps: list[TraceStep] = []
    active, run, stalls = 0, 0, 0
    while len(steps) < _MAX_TRACE_STEPS:
        mask = net.mask_of(world)
        if all(net.task_complete(mask, g) for g in goals):
            break
        if net.task_complete(mask, goals[active]) or not net.valid_next_mask(
            mask, goals[active]
        ):
            if not multi or stalls > 2:
                break
            active, run, stalls = 1 - active, 0, stalls + 1
            continue
        stalls = 0
        action, flag = None, False
        if wrong and rng.random() >= c:
            action = _safe_wrong_step(net, world, goals, rng)
            flag = action is not None
        if action is None:
            action = _advance(net, world, goals[active], rng)
            flag = False
        steps.append(TraceStep(action, goals[active], flag))
        world = apply_primitive(net, world, action)
        if not flag:
            run += 1
        if multi and run >= min_run:
            other = 1 - active
            mask = net.mask_of(world)
            if (
                not net.task_complete(mask, goals[other])
                and net.valid_next_mask(mask, goals[other])
                and rng.random() < _SWITCH_PROB
            ):
                active, run = other, 0
    return HumanTrace(category, tuple(goals), tuple(steps))


def _pick_goals(net: TaskNet, rng: random.Random, k: int) -> tuple[str, ...]:
    goals = sorted(net.goals)
    if k == 1:
        return (goals[rng.randrange(len(goals))],)
    i = rng.randrange(len(goals))
    j = rng.randrange(len(goals) - 1)
    return (goals[i], goals[(i + 1 + j) % len(goals)])


def _safe_wrong_step(net, world, goals, rng) -> str | None:
    """A mistaken action that leaves every scripted goal still achievable."""
    mask = net.mask_of(world)
    candidates = []
    for p in sorted(net.wrong_set_mask(mask)):
        after = net.mask_of(apply_primitive(net, world, p))
        if all(
            net.valid_next_mask(after, g) or net.task_complete(after, g) for g in goals
        ):
            candidates.append(p)
    if not candidates:
        return None
    return candidates[rng.randrange(len(candidates))]


def trace_to_doc(net: TaskNet, trace: HumanTrace, seed: int) -> dict:
    return {
        "domain": net.domain,
        "category": trace.category,
        "seed": seed,
        "steps": [
            {"goal": s.goal, "action": s.action, "wrong": s.is_wrong} for s in trace.steps
        ],
    }


def trace_from_doc(doc: dict) -> HumanTrace:
    steps = tuple(TraceStep(s["action"], s["goal"], bool(s["wrong"])) for s in doc["steps"])
    goals = tuple(dict.fromkeys(s.goal for s in steps))
    return HumanTrace(doc["category"], goals, steps)


def sense(net: TaskNet, world: dict, rng: random.Random, sr: float) -> dict[str, bool]:
    """Full sensor vector: each variable reads wrong independently at 1 - sr."""
    return {v: (world[v] if rng.random() < sr else not world[v]) for v in net.var_order}


@dataclass(frozen=True)
class StepRecord:
    executed: str
    goal: str
    is_wrong: bool
    goal_pred: str
    next_pred: str
    agent_action: AgentAction
    reward: float
    suggested: str | None = None  # Inform issued after a negative answer


@dataclass
class EpisodeLog:
    category: str
    records: list[StepRecord] = field(default_factory=list)
    decision_times: list[float] = field(default_factory=list)
    snapshots: list[dict] = field(default_factory=list)  # only when requested

    @property
    def total_reward(self) -> float:
        return sum(r.reward for r in self.records)

    @property
    def n_asks(self) -> int:
        return sum(1 for r in self.records if r.agent_action.kind == "ask")

    def to_lines(self) -> list[str]:
        """Line-delimited step records for log files."""
        out = []
        for r in self.records:
            out.append(
                json.dumps(
                    {
                        "executed": r.executed,
                        "goal": r.goal,
                        "wrong": r.is_wrong,
                        "goal_pred": r.goal_pred,
                        "next_pred": r.next_pred,
                        "agent": r.agent_action.kind,
                        "target": r.agent_action.target,
                        "reward": r.reward,
                        "suggested": r.suggested,
                    },
                    sort_keys=True,
                )
            )
        return out


def run_episode(
    net: TaskNet,
    trace: HumanTrace,
    policy: str,
    *,
    planner_cfg: PlannerConfig,
    sr: float,
    noise_seed: int,
    lang_seed: int,
    policy_seed: int,
    compliance: float = 1.0,
    scripted_answers: dict[int, "bel.LanguageLabel"] | None = None,
    record_snapshots: bool = False,
) -> EpisodeLog:
    """Play one trace against one agent policy.

    Sensor noise is re-seeded per step index from `noise_seed`, so two
    policies given the same seed see identical readings even if their
    interventions make the scripts diverge.
    """
    if policy not in ("d4gr", "htn", "always-ask", "random-ask"):
        raise ValueError(f"unknown policy: {policy!r}")
    model_c = model_c_for(trace.category)
    rng_lang = random.Random(lang_seed)
    rng_policy = random.Random(policy_seed)

    b = bel.init_belief(net)
    world = net.initial_world()
    script = list(trace.steps)
    log = EpisodeLog(trace.category)

    i = 0
    while i < len(script):
        step = script[i]
        mask_before = net.mask_of(world)
        is_wrong = momdp.wrong_here(net, mask_before, step.action)
        world = apply_primitive(net, world, step.action)

        rng_sense = random.Random(derive_seed(noise_seed, i))
        ow = bel.WorldObservation(sense(net, world, rng_sense, sr))
        b_prev = b
        b = bel.belief_step(b, ow, bel.LanguageLabel.NONE, None, net, sr=sr, c=model_c)

        t0 = time.perf_counter()
        if policy == "htn":
            action = WAIT
        elif policy == "always-ask":
            action = ask(step.action)
        elif policy == "random-ask":
            prims = sorted(net.primitives)
            action = ask(prims[rng_policy.randrange(len(prims))])
        else:
            action = plan_action(b, net, planner_cfg, rng_policy)
        log.decision_times.append(time.perf_counter() - t0)

        r = momdp.reward(action, step.action, is_wrong)

        # fold the answer back into this step's belief exactly (recompute
        # from the pre-step belief with both evidences at once)
        if action.kind == "ask":
            if scripted_answers is not None and i in scripted_answers:
                label = scripted_answers[i]
            else:
                label = momdp.sample_answer(rng_lang, step.action, action.target)
            b = bel.belief_step(b_prev, ow, label, action.target, net, sr=sr, c=model_c)
        else:
            label = bel.LanguageLabel.NONE

        goal_pred = min(b.goal_dist, key=lambda g: (-b.goal_dist[g], g))
        next_pred = bel.predict_next_action(b, net)

        suggested = None
        if label is bel.LanguageLabel.NEGATIVE:
            # fixed reactive policy: offer the predicted correct step; the
            # human only follows advice that actually serves their goal
            suggested = next_pred
            if i + 1 < len(script) and next_pred in net.valid_next_mask(
                net.mask_of(world), step.goal
            ):
                # draw only for fractional compliance so 0 and 1 stay
                # stream-identical to a live session
                follows = compliance >= 1.0 or (
                    compliance > 0.0 and rng_policy.random() < compliance
                )
                if follows:
                    script[i + 1] = TraceStep(next_pred, step.goal, False)

        log.records.append(
            StepRecord(
                step.action, step.goal, is_wrong, goal_pred, next_pred, action, r, suggested
            )
        )
        if record_snapshots:
            log.snapshots.append(bel.snapshot(b))
        i += 1
    return log

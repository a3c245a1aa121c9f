"""Online tree search over the question-asking decision.

Monte-Carlo tree search over histories: hidden states are sampled from the
current belief at the root, actions are scored with UCB1, and observation
branching is capped at a fixed number of sampled keys per action node.
Leaves are evaluated with the always-wait baseline, whose value is zero.
The tree is rebuilt from scratch at every decision point.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .belief import Belief, RecognitionError, map_action
from .momdp import WAIT, AgentAction, PlannerConfig, ask, generative_step, sample_root_state
from .tasknet import TaskNet

_WAIT_IDX, _ASK_IDX = 0, 1


class _Node:
    __slots__ = ("visits", "n", "q", "children")

    def __init__(self):
        self.visits = 0
        self.n = [0, 0]
        self.q = [0.0, 0.0]
        self.children: tuple[dict, dict] = ({}, {})


@dataclass(frozen=True)
class PlanStats:
    wait_value: float
    ask_value: float
    ask_target: str
    wait_visits: int
    ask_visits: int
    sims: int


def plan_action(
    b: Belief, net: TaskNet, cfg: PlannerConfig, rng: random.Random | None = None
) -> AgentAction:
    return plan_action_stats(b, net, cfg, rng)[0]


def plan_action_stats(
    b: Belief, net: TaskNet, cfg: PlannerConfig, rng: random.Random | None = None
) -> tuple[AgentAction, PlanStats]:
    if cfg.sims < 1 or cfg.depth < 1:
        raise ValueError("planner needs at least one simulation and depth one")
    if not b.action_dist or not b.goal_dist:
        raise RecognitionError("belief has no support to plan from")
    if rng is None:
        rng = random.Random(cfg.seed)

    target = map_action(b)
    root = _Node()
    for _ in range(cfg.sims):
        state = sample_root_state(b, net, rng)
        _simulate(net, state, root, cfg.depth, cfg, rng, target)

    stats = PlanStats(
        wait_value=root.q[_WAIT_IDX],
        ask_value=root.q[_ASK_IDX],
        ask_target=target,
        wait_visits=root.n[_WAIT_IDX],
        ask_visits=root.n[_ASK_IDX],
        sims=cfg.sims,
    )
    # ties go to the quiet option
    action = ask(target) if stats.ask_value > stats.wait_value else WAIT
    return action, stats


def _select(node: _Node, ucb_c: float) -> int:
    for idx in (_WAIT_IDX, _ASK_IDX):
        if node.n[idx] == 0:
            return idx
    log_total = math.log(node.visits)
    best, best_score = _WAIT_IDX, -math.inf
    for idx in (_WAIT_IDX, _ASK_IDX):
        score = node.q[idx] + ucb_c * math.sqrt(log_total / node.n[idx])
        if score > best_score:
            best, best_score = idx, score
    return best


def _simulate(net, state, node, depth, cfg, rng, root_target) -> float:
    if depth == 0:
        return 0.0
    idx = _select(node, cfg.ucb_c)
    if idx == _WAIT_IDX:
        action = WAIT
    else:
        # below the root the question targets the sampled just-executed step
        action = ask(root_target if depth == cfg.depth else state.current)
    r, obs, nxt = generative_step(
        net, state, action, rng, c=cfg.c, sr=cfg.sr, wait_cost=cfg.wait_cost
    )
    if nxt is None:
        total = r
    else:
        kids = node.children[idx]
        child = kids.get(obs)
        if child is None:
            if len(kids) < cfg.obs_samples:
                child = kids[obs] = _Node()
            else:
                keys = sorted(kids, key=repr)
                child = kids[keys[rng.randrange(len(keys))]]
        if child.visits == 0:
            child.visits += 1  # expand, then fall back to the wait baseline
            total = r
        else:
            total = r + cfg.gamma * _simulate(net, nxt, child, depth - 1, cfg, rng, root_target)
    node.visits += 1
    node.n[idx] += 1
    node.q[idx] += (total - node.q[idx]) / node.n[idx]
    return total

"""Decision layer: agent actions, rewards, and the sampled generative model.

The agent chooses between waiting, asking "did you just do X?", and (outside
of planning, as a fixed reaction to a "no") informing the predicted correct
step. Rewards depend only on whether a question catches an actual mistake.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .belief import Belief, LanguageLabel
from .tasknet import TaskNet

REWARD_CAUGHT_MISTAKE = 5.0
REWARD_BAD_ASK = -5.0

EFFECT_PROB = 0.999  # chance an executed effect actually lands

ANSWER_MATCH_YES = 0.99  # p(yes | asked action == executed action)
ANSWER_MISMATCH_YES = 0.01

_POSITIVE_WORDS = frozenset({"yes", "yeah", "sure", "yup"})
_NEGATIVE_WORDS = frozenset({"no", "nope", "other", "not"})


@dataclass(frozen=True)
class AgentAction:
    kind: str  # "wait" | "ask" | "inform"
    target: str | None = None

    def __post_init__(self):
        if self.kind not in ("wait", "ask", "inform"):
            raise ValueError(f"unknown agent action kind: {self.kind!r}")
        if self.kind != "wait" and self.target is None:
            raise ValueError(f"{self.kind} action needs a target primitive")


WAIT = AgentAction("wait")


def ask(target: str) -> AgentAction:
    return AgentAction("ask", target)


def inform(target: str) -> AgentAction:
    return AgentAction("inform", target)


def reward(action: AgentAction, current_primitive: str | None, is_wrong: bool) -> float:
    if action.kind == "ask":
        if is_wrong and action.target == current_primitive:
            return REWARD_CAUGHT_MISTAKE
        return REWARD_BAD_ASK
    return 0.0


def q_next(q: str | None, a_prev: AgentAction | None) -> str | None:
    """The question on the table after the agent acts."""
    if a_prev is not None and a_prev.kind == "ask":
        return a_prev.target
    return q


def classify_utterance(text: str) -> LanguageLabel:
    """Map free text to a yes/no label; negation words win over agreement words."""
    tokens = set(re.findall(r"[a-z']+", text.lower()))
    if tokens & _NEGATIVE_WORDS:
        return LanguageLabel.NEGATIVE
    if tokens & _POSITIVE_WORDS:
        return LanguageLabel.POSITIVE
    return LanguageLabel.NONE


def sample_answer(rng: random.Random, executed: str, asked: str) -> LanguageLabel:
    p_yes = ANSWER_MATCH_YES if executed == asked else ANSWER_MISMATCH_YES
    return LanguageLabel.POSITIVE if rng.random() < p_yes else LanguageLabel.NEGATIVE


@dataclass(frozen=True)
class PlannerConfig:
    depth: int = 19
    obs_samples: int = 6
    sims: int = 500
    ucb_c: float = 5.0
    gamma: float = 0.95
    c: float = 0.99  # chance the human takes a valid step
    sr: float = 0.95  # sensor reliability
    wait_cost: float = 0.0  # planning-only shaping, never reported as reward
    seed: int = 0


@dataclass(frozen=True)
class TrueState:
    goal: str
    current: str  # primitive the human just executed
    world: int  # bitmask over net.var_order
    is_wrong: bool


def _weighted_choice(rng: random.Random, dist: dict[str, float]) -> str:
    r = rng.random()
    acc = 0.0
    last = None
    for k in sorted(dist):
        acc += dist[k]
        last = k
        if r < acc:
            return k
    return last  # float dust


def wrong_here(net: TaskNet, world_mask: int, alpha: str) -> bool:
    """Is executing `alpha` in this world a step toward no goal at all?"""
    for g in net.goals:
        if alpha in net.valid_next_mask(world_mask, g):
            return False
    return True


def _revert_effects(net: TaskNet, world_mask: int, alpha: str) -> int:
    mask = world_mask
    for var, val in net.primitives[alpha].eff:
        bit = net.var_bit(var)
        mask = (mask & ~bit) | (0 if val else bit)
    return mask


def sample_root_state(b: Belief, net: TaskNet, rng: random.Random) -> TrueState:
    """Draw a full hidden state from the factored belief."""
    goal = _weighted_choice(rng, b.goal_dist)
    alpha = _weighted_choice(rng, b.action_dist)
    mask = 0
    for var in net.var_order:
        if rng.random() < b.world_marginals[var]:
            mask |= net.var_bit(var)
    # judge the sampled action against the world it was executed in
    prev = _revert_effects(net, mask, alpha)
    return TrueState(goal, alpha, mask, wrong_here(net, prev, alpha))


def step_human(
    net: TaskNet, state: TrueState, rng: random.Random, c: float
) -> TrueState | None:
    """Sample the human's next primitive and its noisy effects; None if finished."""
    if net.task_complete(state.world, state.goal):
        return None
    valid = net.valid_next_mask(state.world, state.goal)
    wrong = net.wrong_set_mask(state.world)
    if valid and (rng.random() < c or not wrong):
        pool = valid
    elif wrong:
        pool = wrong
    else:
        return None
    beta = sorted(pool)[rng.randrange(len(pool))]
    is_wrong = wrong_here(net, state.world, beta)
    mask = state.world
    for var, val in net.primitives[beta].eff:
        bit = net.var_bit(var)
        landed = val if rng.random() < EFFECT_PROB else not val
        mask = (mask & ~bit) | (bit if landed else 0)
    return TrueState(state.goal, beta, mask, is_wrong)


def sense_touched(
    net: TaskNet, state: TrueState, rng: random.Random, sr: float
) -> tuple[tuple[str, bool], ...]:
    """Noisy readings of just the variables the executed primitive touches."""
    out = []
    for var in sorted(net.touched_vars(state.current)):
        truth = bool(state.world & net.var_bit(var))
        out.append((var, truth if rng.random() < sr else not truth))
    return tuple(out)


def generative_step(
    net: TaskNet,
    state: TrueState,
    action: AgentAction,
    rng: random.Random,
    *,
    c: float,
    sr: float,
    wait_cost: float = 0.0,
):
    """One tick of the planning model.

    Returns (reward, observation key, next state); the observation key and
    next state are None when the episode ends before the next tick.
    """
    r = reward(action, state.current, state.is_wrong)
    if action.kind == "wait" and wait_cost:
        r -= wait_cost
    if action.kind == "ask":
        label = sample_answer(rng, state.current, action.target)
    else:
        label = LanguageLabel.NONE
    nxt = step_human(net, state, rng, c)
    if nxt is None:
        return r, None, None
    obs = (sense_touched(net, nxt, rng, sr), label)
    return r, obs, nxt

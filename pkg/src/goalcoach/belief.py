"""Factored posterior over goal, current primitive action, and world state.

The update pipeline fuses a world-sensor reading and an optional yes/no
language label each tick:

    action posterior -> language reweight -> world marginals
    -> explanation-set update -> goal distribution

Explanations are partially decomposed task trees; their probabilities are
advanced lazily, multiplying method expand probabilities only when a
decomposition is actually needed to account for an action.
"""
from __future__ import annotations

import enum
import weakref
from dataclasses import dataclass, replace
from typing import Mapping

from .tasknet import TaskNet

MODEL_EFFECT_PROB = 0.999  # chance an executed action's effect lands as modeled
MODEL_MISS_PROB = 0.001
DEFAULT_C = 0.99  # chance the human takes a valid successor step

CPT_MATCH_YES = 0.99  # p(yes | asked action == current action)
CPT_MISMATCH_YES = 0.01


class RecognitionError(Exception):
    """The recognizer reached a state it cannot explain or sample from."""


class LanguageLabel(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NONE = "none"


@dataclass(frozen=True)
class WorldObservation:
    readings: Mapping[str, bool] | None

    def require(self) -> Mapping[str, bool]:
        if self.readings is None:
            raise ValueError("world observation is null")
        return self.readings


@dataclass(frozen=True)
class PlanNode:
    """One node of an explanation forest.

    `method` is None while a composite task is still undecomposed; `done`
    is meaningful for primitive leaves only.
    """

    name: str
    method: str | None = None
    children: tuple["PlanNode", ...] = ()
    done: bool = False


@dataclass(frozen=True)
class Explanation:
    goal: str
    root: PlanNode
    prob: float


@dataclass(frozen=True)
class Belief:
    goal_dist: dict[str, float]
    action_dist: dict[str, float]
    world_marginals: dict[str, float]
    explaset: tuple[Explanation, ...]
    q: str | None
    step_index: int


def snapshot(b: Belief) -> dict:
    return {
        "step": b.step_index,
        "goal_dist": dict(b.goal_dist),
        "action_dist": dict(b.action_dist),
        "world_marginals": dict(b.world_marginals),
        "q": b.q,
        "n_explanations": len(b.explaset),
    }


# ---- explanation forests ----

_expansion_caches: "weakref.WeakKeyDictionary[TaskNet, dict]" = weakref.WeakKeyDictionary()


def _node_complete(net: TaskNet, node: PlanNode) -> bool:
    if net.is_primitive(node.name):
        return node.done
    if node.method is None:
        return False
    return all(_node_complete(net, c) for c in node.children)


def expansions(net: TaskNet, node: PlanNode) -> tuple[tuple[str, PlanNode, float], ...]:
    """All single-action advances of `node`: (action, new node, expand-prob product)."""
    cache = _expansion_caches.setdefault(net, {})
    hit = cache.get(node)
    if hit is None:
        hit = tuple(_expand(net, node))
        cache[node] = hit
    return hit


def _expand(net: TaskNet, node: PlanNode):
    if net.is_primitive(node.name):
        if not node.done:
            yield node.name, replace(node, done=True), 1.0
        return
    if node.method is None:
        for m in net.methods_by_task[node.name]:
            children = tuple(PlanNode(sub) for sub in m.subtasks)
            decomposed = PlanNode(node.name, m.id, children)
            for alpha, nn, xp in _expand(net, decomposed):
                yield alpha, nn, xp * m.prob
        return
    method = net.methods[node.method]
    for i, child in enumerate(node.children):
        if _node_complete(net, child):
            continue
        for alpha, nc, xp in expansions(net, child):
            kids = node.children[:i] + (nc,) + node.children[i + 1 :]
            yield alpha, replace(node, children=kids), xp
        if method.ordering == "ordered":
            break


def pending_actions(net: TaskNet, node: PlanNode) -> frozenset[str]:
    return frozenset(alpha for alpha, _, _ in expansions(net, node))


# ---- belief construction and update ----


def init_belief(net: TaskNet) -> Belief:
    if not net.goals:
        raise RecognitionError("task network has no goals")
    p = 1.0 / len(net.goals)
    explaset = tuple(Explanation(g, PlanNode(g), p) for g in net.goals)
    pending: set[str] = set()
    for e in explaset:
        pending |= pending_actions(net, e.root)
    action_dist = {a: 1.0 / len(pending) for a in sorted(pending)}
    marginals = {v.id: 1.0 if v.initial else 0.0 for v in net.vars.values()}
    return Belief(
        goal_dist={g: p for g in net.goals},
        action_dist=action_dist,
        world_marginals=marginals,
        explaset=explaset,
        q=None,
        step_index=0,
    )


def _normalized(weights: dict[str, float], what: str) -> dict[str, float]:
    total = sum(weights.values())
    if total <= 0.0:
        raise RecognitionError(f"{what} has zero total mass")
    return {k: v / total for k, v in weights.items()}


def _action_model(net: TaskNet, root: PlanNode, c: float) -> dict[str, float]:
    """p(next action | explanation): mass c over the pending successors
    weighted by expansion probability, the remainder uniform over every
    other primitive (the wrong set)."""
    exps = expansions(net, root)
    n_total = len(net.primitives)
    if not exps:
        return {a: 1.0 / n_total for a in net.primitives}
    w: dict[str, float] = {}
    total = 0.0
    for alpha, _, xp in exps:
        w[alpha] = w.get(alpha, 0.0) + xp
        total += xp
    n_wrong = n_total - len(w)
    scale = c if n_wrong else 1.0
    return {
        a: (scale * w[a] / total if a in w else (1.0 - c) / n_wrong)
        for a in net.primitives
    }


def action_prior(b: Belief, net: TaskNet, c: float = DEFAULT_C) -> dict[str, float]:
    """Transition prior over the next primitive: the per-explanation action
    models mixed by explanation probability."""
    if all(not pending_actions(net, e.root) for e in b.explaset):
        raise RecognitionError(
            "no pending primitive action in any explanation (irrecoverable state)"
        )
    prior = {a: 0.0 for a in net.primitives}
    for e in b.explaset:
        if e.prob == 0.0:
            continue
        for a, p in _action_model(net, e.root, c).items():
            prior[a] += e.prob * p
    return prior


def _sensor_like(reading: bool, value: bool, sr: float) -> float:
    return sr if reading == value else 1.0 - sr


def action_posterior(
    b: Belief,
    ow: WorldObservation,
    net: TaskNet,
    sr: float,
    c: float = DEFAULT_C,
) -> dict[str, float]:
    """Posterior over the just-executed primitive given the sensor vector."""
    readings = ow.require()
    prior = action_prior(b, net, c)
    marg = b.world_marginals

    # per-variable agreement factor: sum_v p(v) * p(reading | v)
    agree = {
        v: marg[v] * _sensor_like(readings[v], True, sr)
        + (1.0 - marg[v]) * _sensor_like(readings[v], False, sr)
        for v in net.vars
    }
    all_agree = 1.0
    for g in agree.values():
        all_agree *= g

    scores: dict[str, float] = {}
    for alpha, p_alpha in prior.items():
        prim = net.primitives[alpha]
        pre = dict(prim.pre)
        eff = dict(prim.eff)
        relevant = sorted(set(pre) | set(eff))

        # marginal mass over previous-world values of the relevant vars,
        # split on whether the preconditions held
        total_all = 1.0
        total_pre = 1.0
        for v in relevant:
            like_t = 1.0 if v in eff else _sensor_like(readings[v], True, sr)
            like_f = 1.0 if v in eff else _sensor_like(readings[v], False, sr)
            f_t = marg[v] * like_t
            f_f = (1.0 - marg[v]) * like_f
            total_all *= f_t + f_f
            total_pre *= (f_t if pre[v] else f_f) if v in pre else f_t + f_f
        total_nopre = total_all - total_pre

        # effect variables: transition potential times likelihood, summed over
        # the two possible new values
        s_pre = 1.0
        s_nopre = 1.0
        for v, val in eff.items():
            like_hit = _sensor_like(readings[v], val, sr)
            like_miss = _sensor_like(readings[v], not val, sr)
            s_pre *= MODEL_EFFECT_PROB * like_hit + MODEL_MISS_PROB * like_miss
            s_nopre *= MODEL_MISS_PROB * (like_hit + like_miss)

        untouched = all_agree
        for v in relevant:
            untouched /= agree[v]
        scores[alpha] = p_alpha * (total_pre * s_pre + total_nopre * s_nopre) * untouched

    return _normalized(scores, "action posterior")


def world_posterior(
    b: Belief,
    act_post: Mapping[str, float],
    ow: WorldObservation,
    net: TaskNet,
    sr: float,
) -> dict[str, float]:
    """Per-variable marginals of the new world, exact under the factored prior.

    For each action the joint over its relevant variables splits into a
    preconditions-held branch (effects land at the modeled rate) and a
    preconditions-failed branch (a flat potential over effect values); both
    are separable, so each variable's conditional is closed-form.
    """
    readings = ow.readings

    def like(v: str, val: bool) -> float:
        return 1.0 if readings is None else _sensor_like(readings[v], val, sr)

    marg = b.world_marginals
    out = {v: 0.0 for v in net.vars}
    for alpha, p_alpha in act_post.items():
        if p_alpha == 0.0:
            continue
        prim = net.primitives[alpha]
        pre = dict(prim.pre)
        eff = dict(prim.eff)
        relevant = sorted(set(pre) | set(eff))

        # previous-world factor per relevant var (likelihood applies to the
        # new value, so only non-effect vars carry it here)
        f: dict[str, tuple[float, float]] = {}
        fall = tp = 1.0
        for v in relevant:
            l_t = 1.0 if v in eff else like(v, True)
            l_f = 1.0 if v in eff else like(v, False)
            f[v] = (marg[v] * l_t, (1.0 - marg[v]) * l_f)
            fall *= f[v][0] + f[v][1]
            tp *= (f[v][0] if pre[v] else f[v][1]) if v in pre else f[v][0] + f[v][1]

        s_t: dict[str, tuple[float, float]] = {}
        st_prod = sf_prod = 1.0
        for v, val in eff.items():
            hit_t = MODEL_EFFECT_PROB if val else MODEL_MISS_PROB
            t_branch = (hit_t * like(v, True), (1.0 - hit_t) * like(v, False))
            s_t[v] = t_branch
            st_prod *= t_branch[0] + t_branch[1]
            sf_prod *= MODEL_MISS_PROB * (like(v, True) + like(v, False))
        w_held = tp * st_prod
        w_failed = (fall - tp) * sf_prod
        total = w_held + w_failed
        if total <= 0.0:
            continue

        for v in net.vars:
            if v in eff:
                bt = s_t[v]
                m_held = bt[0] / (bt[0] + bt[1])
                # flat effect potential: only the reading shapes the value
                lt, lf = like(v, True), like(v, False)
                m_failed = lt / (lt + lf)
            elif v in f:
                m_held = 1.0 if pre[v] else 0.0
                rest_all = fall / (f[v][0] + f[v][1])
                req = f[v][0] if pre[v] else f[v][1]
                rest_pre = tp / req if req > 0 else 0.0
                num = f[v][0] * rest_all - (f[v][0] * rest_pre if pre[v] else 0.0)
                den = fall - tp
                m_failed = num / den if den > 0 else 0.0
            else:
                lt = marg[v] * like(v, True)
                lf = (1.0 - marg[v]) * like(v, False)
                m = lt / (lt + lf) if lt + lf > 0 else 0.5
                out[v] += p_alpha * m
                continue
            out[v] += p_alpha * (w_held * m_held + w_failed * m_failed) / total
    return out


def language_reweight(
    act_post: Mapping[str, float],
    q: str | None,
    ol: LanguageLabel,
) -> dict[str, float]:
    """Multiply by the yes/no answer model p(answer | action, asked) and renormalize."""
    if ol is LanguageLabel.NONE:
        return dict(act_post)
    if q is None:
        return dict(act_post)  # 0.5 / 0.5 row cancels under renormalization
    if q not in act_post:
        raise RecognitionError(f"asked action {q!r} is not in the primitive vocabulary")
    yes = ol is LanguageLabel.POSITIVE
    weighted = {}
    for alpha, p in act_post.items():
        match = alpha == q
        row_yes = CPT_MATCH_YES if match else CPT_MISMATCH_YES
        weighted[alpha] = p * (row_yes if yes else 1.0 - row_yes)
    return _normalized(weighted, "language-reweighted action posterior")


def explaset_update(
    b: Belief,
    act_post: Mapping[str, float],
    net: TaskNet,
    c: float = DEFAULT_C,
    beam: bool = False,
    prune_eps: float = 1e-4,
) -> tuple[Explanation, ...]:
    """Advance explanation forests by one action under the evidence.

    `act_post` mixes the evidence with the global action prior; dividing it
    out recovers the per-action likelihood, which is then re-weighted by each
    explanation's own action model so goals that predicted the action gain.
    """
    prior = action_prior(b, net, c)
    like = {a: (act_post[a] / prior[a] if prior[a] > 0 else 0.0) for a in act_post}
    merged: dict[tuple[str, PlanNode], float] = {}
    n_total = len(net.primitives)
    for e in b.explaset:
        if e.prob == 0.0:
            continue
        exps = expansions(net, e.root)
        pending = {alpha for alpha, _, _ in exps}
        total_xp = sum(xp for _, _, xp in exps)
        n_wrong = n_total - len(pending)
        scale = c if n_wrong else 1.0
        for alpha, nn, xp in exps:
            # advancing chain: p(alpha, chain | e) = c * xp / total
            w = like.get(alpha, 0.0) * scale * xp / total_xp * e.prob
            if w > 0.0:
                key = (e.goal, nn)
                merged[key] = merged.get(key, 0.0) + w
        if not exps:
            # completed forest: any action is equally surprising
            for alpha, l_alpha in like.items():
                w = l_alpha * e.prob / n_total
                if w > 0.0:
                    key = (e.goal, e.root)
                    merged[key] = merged.get(key, 0.0) + w
        elif n_wrong:
            for alpha, l_alpha in like.items():
                if alpha in pending:
                    continue
                # wrong step: the forest is unchanged but the mass still flows
                w = l_alpha * (1.0 - c) / n_wrong * e.prob
                if w > 0.0:
                    key = (e.goal, e.root)
                    merged[key] = merged.get(key, 0.0) + w
    if not merged:
        raise RecognitionError("explanation set collapsed to zero mass")
    if beam:
        total = sum(merged.values())
        merged = {k: v for k, v in merged.items() if v / total >= prune_eps} or merged
    total = sum(merged.values())
    items = sorted(merged.items(), key=lambda kv: (kv[0][0], repr(kv[0][1])))
    return tuple(Explanation(g, root, w / total) for (g, root), w in items)


def goal_distribution(explaset: tuple[Explanation, ...]) -> dict[str, float]:
    out: dict[str, float] = {}
    for e in explaset:
        out[e.goal] = out.get(e.goal, 0.0) + e.prob
    return out


def belief_step(
    b: Belief,
    ow: WorldObservation,
    ol: LanguageLabel,
    q: str | None,
    net: TaskNet,
    *,
    sr: float,
    c: float = DEFAULT_C,
    beam: bool = False,
    prune_eps: float = 1e-4,
) -> Belief:
    """One full update; pure function of its inputs.

    `q` is the question the label `ol` answers, i.e. the asked primitive for
    this step's action. A question that is still unanswered stays open on the
    returned belief; an answered one is consumed.
    """
    if ow.readings is not None:
        act_post = action_posterior(b, ow, net, sr, c)
    else:
        act_post = action_prior(b, net, c)
    act_post = language_reweight(act_post, q, ol)
    marginals = world_posterior(b, act_post, ow, net, sr)
    explaset = explaset_update(b, act_post, net, c, beam=beam, prune_eps=prune_eps)
    goal_dist = goal_distribution(explaset)
    open_q = q if (q is not None and ol is LanguageLabel.NONE) else None
    return Belief(
        goal_dist=goal_dist,
        action_dist=dict(act_post),
        world_marginals=marginals,
        explaset=explaset,
        q=open_q,
        step_index=b.step_index + 1,
    )


def map_action(b: Belief) -> str:
    return min(b.action_dist, key=lambda a: (-b.action_dist[a], a))


def predict_next_action(b: Belief, net: TaskNet) -> str:
    """Most probable next primitive after advancing by the MAP current action."""
    alpha = map_action(b)
    successors: list[tuple[PlanNode, float]] = []
    for e in b.explaset:
        exps = [(nn, xp) for a, nn, xp in expansions(net, e.root) if a == alpha]
        if exps:
            successors.extend((nn, xp * e.prob) for nn, xp in exps)
        else:
            successors.append((e.root, e.prob))
    scores: dict[str, float] = {}
    for root, w in successors:
        for p in pending_actions(net, root):
            scores[p] = scores.get(p, 0.0) + w
    if not scores:
        return alpha
    return min(scores, key=lambda p: (-scores[p], p))

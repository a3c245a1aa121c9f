import random

import pytest

from goalcoach import belief as bel
from goalcoach.tasknet import apply_primitive, load_tasknet
from microdomains import MICRO_DOMAINS, MICRO_FORK, MICRO_LINE


@pytest.fixture
def line_net():
    return load_tasknet(MICRO_LINE)


def _sense(net, world, rng, sr):
    return {v: (world[v] if rng.random() < sr else not world[v]) for v in net.var_order}


def test_init_belief_uniform(line_net):
    b = bel.init_belief(line_net)
    assert b.goal_dist == {"g_long": 0.5, "g_short": 0.5}
    assert sum(b.action_dist.values()) == pytest.approx(1.0)
    assert b.q is None and b.step_index == 0
    assert all(p in (0.0, 1.0) for p in b.world_marginals.values())


def test_expansions_cover_methods():
    net = load_tasknet(MICRO_FORK)
    root = bel.PlanNode("g_fork")
    exps = bel.expansions(net, root)
    # both methods share the first step, so one pending action with both
    # expansion weights
    assert bel.pending_actions(net, root) == {"p1"}
    assert sum(xp for _, _, xp in exps) == pytest.approx(1.0)
    assert {xp for _, _, xp in exps} == {0.6, 0.4}


def test_action_model_mass_split(line_net):
    dist = bel._action_model(line_net, bel.PlanNode("g_long"), c=0.9)
    assert dist["pa"] == pytest.approx(0.9)
    assert dist["pb"] == pytest.approx(0.05)
    assert dist["pc"] == pytest.approx(0.05)
    assert sum(dist.values()) == pytest.approx(1.0)


def test_action_prior_mixes_explanations(line_net):
    b = bel.init_belief(line_net)
    prior = bel.action_prior(b, line_net, c=0.9)
    assert prior["pa"] == pytest.approx(0.5 * 0.9 + 0.5 * 0.05)
    assert prior["pc"] == pytest.approx(0.5 * 0.05 + 0.5 * 0.9)
    assert sum(prior.values()) == pytest.approx(1.0)


def test_language_reweight_rows():
    post = {"a": 0.5, "b": 0.5}
    yes = bel.language_reweight(post, "a", bel.LanguageLabel.POSITIVE)
    assert yes["a"] == pytest.approx(0.99)
    assert yes["b"] == pytest.approx(0.01)
    no = bel.language_reweight(post, "a", bel.LanguageLabel.NEGATIVE)
    assert no["a"] == pytest.approx(0.01)
    assert no["b"] == pytest.approx(0.99)
    # no label, or no question on the table: posterior unchanged
    assert bel.language_reweight(post, "a", bel.LanguageLabel.NONE) == post
    assert bel.language_reweight(post, None, bel.LanguageLabel.POSITIVE) == post
    with pytest.raises(bel.RecognitionError):
        bel.language_reweight(post, "ghost", bel.LanguageLabel.POSITIVE)


@pytest.mark.parametrize("name", sorted(MICRO_DOMAINS))
def test_belief_step_normalized(name):
    net = load_tasknet(MICRO_DOMAINS[name])
    rng = random.Random(11)
    b = bel.init_belief(net)
    world = net.initial_world()
    prims = sorted(net.primitives)
    for _ in range(6):
        world = apply_primitive(net, world, prims[rng.randrange(len(prims))])
        ow = bel.WorldObservation(_sense(net, world, rng, 0.9))
        b = bel.belief_step(b, ow, bel.LanguageLabel.NONE, None, net, sr=0.9, c=0.9)
        assert sum(b.goal_dist.values()) == pytest.approx(1.0)
        assert sum(b.action_dist.values()) == pytest.approx(1.0)
        assert all(0.0 <= p <= 1.0 + 1e-12 for p in b.world_marginals.values())
        assert sum(e.prob for e in b.explaset) == pytest.approx(1.0)


def test_belief_step_without_readings_uses_prior(line_net):
    b = bel.init_belief(line_net)
    b2 = bel.belief_step(
        b, bel.WorldObservation(None), bel.LanguageLabel.NONE, None, line_net, sr=0.9, c=0.9
    )
    prior = bel.action_prior(b, line_net, c=0.9)
    for a, p in prior.items():
        assert b2.action_dist[a] == pytest.approx(p)


def test_observed_chain_shifts_goal(line_net):
    """Watching pa then pb should make the long goal dominate."""
    rng = random.Random(0)
    b = bel.init_belief(line_net)
    world = net_world = line_net.initial_world()
    for a in ("pa", "pb"):
        world = apply_primitive(line_net, world, a)
        ow = bel.WorldObservation(_sense(line_net, world, rng, 0.99))
        b = bel.belief_step(b, ow, bel.LanguageLabel.NONE, None, line_net, sr=0.99, c=0.99)
    assert b.goal_dist["g_long"] > 0.9


def test_negative_answer_moves_mass_off_question(line_net):
    rng = random.Random(2)
    b = bel.init_belief(line_net)
    world = apply_primitive(line_net, line_net.initial_world(), "pa")
    ow = bel.WorldObservation(_sense(line_net, world, rng, 0.8))
    plain = bel.belief_step(b, ow, bel.LanguageLabel.NONE, None, line_net, sr=0.8, c=0.9)
    denied = bel.belief_step(b, ow, bel.LanguageLabel.NEGATIVE, "pa", line_net, sr=0.8, c=0.9)
    confirmed = bel.belief_step(b, ow, bel.LanguageLabel.POSITIVE, "pa", line_net, sr=0.8, c=0.9)
    assert denied.action_dist["pa"] < plain.action_dist["pa"] < confirmed.action_dist["pa"]
    assert denied.q is None and confirmed.q is None


def test_unanswered_question_stays_open(line_net):
    rng = random.Random(4)
    b = bel.init_belief(line_net)
    world = apply_primitive(line_net, line_net.initial_world(), "pa")
    ow = bel.WorldObservation(_sense(line_net, world, rng, 0.9))
    b2 = bel.belief_step(b, ow, bel.LanguageLabel.NONE, "pa", line_net, sr=0.9, c=0.9)
    assert b2.q == "pa"


def test_map_action_tie_breaks_lexicographically(line_net):
    b = bel.init_belief(line_net)
    b = bel.Belief(
        b.goal_dist, {"pb": 0.4, "pa": 0.4, "pc": 0.2}, b.world_marginals, b.explaset, None, 0
    )
    assert bel.map_action(b) == "pa"


def test_predict_next_action_follows_chain(line_net):
    b = bel.init_belief(line_net)
    b = bel.Belief(
        {"g_long": 1.0, "g_short": 0.0},
        {"pa": 1.0, "pb": 0.0, "pc": 0.0},
        b.world_marginals,
        (bel.Explanation("g_long", bel.PlanNode("g_long"), 1.0),),
        None,
        0,
    )
    # after pa the ordered chain continues with pb
    assert bel.predict_next_action(b, line_net) == "pb"


def test_beam_pruning_keeps_mass_normalized(line_net):
    rng = random.Random(9)
    b = bel.init_belief(line_net)
    world = line_net.initial_world()
    for a in ("pa", "pb", "pa"):
        world = apply_primitive(line_net, world, a)
        ow = bel.WorldObservation(_sense(line_net, world, rng, 0.95))
        b = bel.belief_step(
            b, ow, bel.LanguageLabel.NONE, None, line_net, sr=0.95, c=0.95, beam=True, prune_eps=0.05
        )
        assert sum(e.prob for e in b.explaset) == pytest.approx(1.0)
    assert all(e.prob >= 0.0 for e in b.explaset)


def test_snapshot_shape(line_net):
    snap = bel.snapshot(bel.init_belief(line_net))
    assert snap["step"] == 0
    assert set(snap) == {"step", "goal_dist", "action_dist", "world_marginals", "q", "n_explanations"}

import type { AgentTurn, BeliefSnapshot, DomainInfo, SessionState } from "../src/api.js";

export const DOMAIN: DomainInfo = {
  name: "kitchen",
  goals: ["wash_hands", "make_tea"],
  primitives: ["turn_on_faucet", "use_soap", "boil_water", "steep_tea"],
  primitives_by_goal: {
    wash_hands: ["turn_on_faucet", "use_soap"],
    make_tea: ["boil_water", "steep_tea"],
  },
  vars: ["faucet_on", "hands_soapy", "water_hot"],
};

export function snapshot(over: Partial<BeliefSnapshot> = {}): BeliefSnapshot {
  return {
    step: 1,
    goal_dist: { wash_hands: 0.7, make_tea: 0.3 },
    action_dist: {
      turn_on_faucet: 0.6,
      use_soap: 0.2,
      boil_water: 0.1,
      steep_tea: 0.05,
      rinse_hands: 0.03,
      dry_hands: 0.02,
    },
    world_marginals: { faucet_on: 0.95, hands_soapy: 0.1, water_hot: 0.02 },
    q: null,
    n_explanations: 4,
    ...over,
  };
}

export function turn(over: Partial<AgentTurn> = {}): AgentTurn {
  return {
    v: 1,
    turn: 0,
    kind: "wait",
    target: null,
    text: null,
    snapshot: snapshot(),
    pending_question: null,
    ...over,
  };
}

export function sessionState(over: Partial<SessionState> = {}): SessionState {
  return {
    v: 1,
    id: "s1",
    domain: "kitchen",
    sr: 0.95,
    step: 1,
    snapshot: snapshot(),
    pending_question: null,
    transcript: [],
    ground_truth: { faucet_on: true, hands_soapy: false, water_hot: false },
    ...over,
  };
}

/** Pure session view model: server payloads in, render-ready data out.
 *
 * The server is authoritative; this module only reshapes its payloads.
 * Turns are versioned by their `turn` counter so stale responses from a
 * slow request can be discarded.
 */

import type { AgentTurn, BeliefSnapshot, DomainInfo, SessionState } from "./api.js";

export interface Bar {
  label: string;
  prob: number;
}

export interface ChatEntry {
  role: "agent" | "user";
  kind: "wait" | "ask" | "inform" | "answer" | "step";
  text: string;
  turn: number;
}

export interface SessionViewModel {
  sessionId: string;
  domain: DomainInfo;
  step: number;
  lastTurn: number;
  goalBars: Bar[];
  actionBars: Bar[];
  actionBarsFull: Bar[];
  worldBars: Bar[];
  pendingQuestion: string | null;
  transcript: ChatEntry[];
  groundTruth: Record<string, boolean> | null;
  busy: boolean;
  error: string | null;
}

const TOP_K = 5;
const NORM_TOL = 1e-6;

/** Sort a distribution descending by mass, re-normalizing when the payload
 * sums within tolerance of 1 but not exactly (display invariant). */
export function toBars(dist: Record<string, number>): Bar[] {
  const entries = Object.entries(dist);
  const total = entries.reduce((acc, [, p]) => acc + p, 0);
  const scale = total > 0 && Math.abs(total - 1) <= NORM_TOL ? 1 / total : 1;
  return entries
    .map(([label, prob]) => ({ label, prob: prob * scale }))
    .sort((a, b) => b.prob - a.prob || a.label.localeCompare(b.label));
}

export function topBars(dist: Record<string, number>, k = TOP_K): Bar[] {
  return toBars(dist).slice(0, k);
}

export function emptyViewModel(sessionId: string, domain: DomainInfo): SessionViewModel {
  return {
    sessionId,
    domain,
    step: 0,
    lastTurn: -1,
    goalBars: [],
    actionBars: [],
    actionBarsFull: [],
    worldBars: [],
    pendingQuestion: null,
    transcript: [],
    groundTruth: null,
    busy: false,
    error: null,
  };
}

export function applySnapshot(vm: SessionViewModel, snap: BeliefSnapshot): SessionViewModel {
  return {
    ...vm,
    step: snap.step,
    goalBars: toBars(snap.goal_dist),
    actionBars: topBars(snap.action_dist),
    actionBarsFull: toBars(snap.action_dist),
    worldBars: Object.entries(snap.world_marginals).map(([label, prob]) => ({ label, prob })),
  };
}

function turnEntry(turn: AgentTurn): ChatEntry | null {
  switch (turn.kind) {
    case "ask":
    case "inform":
      return { role: "agent", kind: turn.kind, text: turn.text ?? "", turn: turn.turn };
    case "wait":
      return null; // silent turns do not clutter the transcript
  }
}

/** Fold one agent turn into the view model; stale turns are dropped. */
export function applyTurn(vm: SessionViewModel, turn: AgentTurn): SessionViewModel {
  if (turn.turn <= vm.lastTurn) return vm;
  const next = applySnapshot(vm, turn.snapshot);
  next.lastTurn = turn.turn;
  next.pendingQuestion = turn.pending_question;
  next.busy = false;
  next.error = null;
  const entry = turnEntry(turn);
  if (entry !== null) next.transcript = [...vm.transcript, entry];
  return next;
}

export function applyUserLine(
  vm: SessionViewModel,
  kind: "answer" | "step",
  text: string,
): SessionViewModel {
  return {
    ...vm,
    busy: true,
    error: null,
    transcript: [...vm.transcript, { role: "user", kind, text, turn: vm.lastTurn }],
  };
}

export function applyError(vm: SessionViewModel, message: string): SessionViewModel {
  return { ...vm, busy: false, error: message };
}

/** Rebuild the model from a full GET /sessions/{id} payload (page reload). */
export function fromSessionState(domain: DomainInfo, state: SessionState): SessionViewModel {
  let vm = applySnapshot(emptyViewModel(state.id, domain), state.snapshot);
  vm.pendingQuestion = state.pending_question;
  for (const turn of state.transcript) {
    const entry = turnEntry(turn);
    if (entry !== null) vm = { ...vm, transcript: [...vm.transcript, entry] };
    vm.lastTurn = turn.turn;
  }
  return vm;
}

export function setGroundTruth(
  vm: SessionViewModel,
  world: Record<string, boolean> | null,
): SessionViewModel {
  return { ...vm, groundTruth: world };
}

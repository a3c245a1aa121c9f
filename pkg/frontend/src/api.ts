/** Typed client for the session service. All payloads carry {"v": 1}. */

export interface DomainInfo {
  name: string;
  goals: string[];
  primitives: string[];
  primitives_by_goal: Record<string, string[]>;
  vars: string[];
}

export interface BeliefSnapshot {
  step: number;
  goal_dist: Record<string, number>;
  action_dist: Record<string, number>;
  world_marginals: Record<string, number>;
  q: string | null;
  n_explanations: number;
}

export interface AgentTurn {
  v: number;
  turn: number;
  kind: "wait" | "ask" | "inform";
  target: string | null;
  text: string | null;
  snapshot: BeliefSnapshot;
  pending_question: string | null;
}

export interface SessionState {
  v: number;
  id: string;
  domain: string;
  sr: number;
  step: number;
  snapshot: BeliefSnapshot;
  pending_question: string | null;
  transcript: AgentTurn[];
  ground_truth: Record<string, boolean>;
}

export interface CreateSessionOptions {
  domain: string;
  sr?: number;
  seed?: number;
  sims?: number;
  wait_cost?: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Minimal transport so tests can swap in a fake without a browser. */
export type Transport = (
  method: string,
  path: string,
  body?: unknown,
) => Promise<{ status: number; json: unknown }>;

export function fetchTransport(baseUrl: string): Transport {
  return async (method, path, body) => {
    const resp = await fetch(baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return { status: resp.status, json: await resp.json().catch(() => null) };
  };
}

async function expectOk<T>(call: Promise<{ status: number; json: unknown }>): Promise<T> {
  const { status, json } = await call;
  if (status >= 400) {
    const detail = (json as { detail?: string } | null)?.detail ?? `HTTP ${status}`;
    throw new ApiError(status, detail);
  }
  return json as T;
}

export class SessionApi {
  constructor(private readonly transport: Transport) {}

  async listDomains(): Promise<DomainInfo[]> {
    const doc = await expectOk<{ domains: DomainInfo[] }>(this.transport("GET", "/domains"));
    return doc.domains;
  }

  async createSession(opts: CreateSessionOptions): Promise<{ id: string; snapshot: BeliefSnapshot }> {
    return expectOk(this.transport("POST", "/sessions", { v: 1, ...opts }));
  }

  async getSession(id: string): Promise<SessionState> {
    return expectOk(this.transport("GET", `/sessions/${id}`));
  }

  async submitStep(id: string, action: string): Promise<AgentTurn> {
    return expectOk(this.transport("POST", `/sessions/${id}/step`, { v: 1, action }));
  }

  async submitUtterance(id: string, text: string): Promise<AgentTurn> {
    return expectOk(this.transport("POST", `/sessions/${id}/utterance`, { v: 1, text }));
  }
}

import { describe, expect, it } from "vitest";
import { ApiError, SessionApi, type Transport } from "../src/api.js";
import { DOMAIN, turn } from "./fixtures.js";

interface Call {
  method: string;
  path: string;
  body?: unknown;
}

function fakeTransport(
  respond: (method: string, path: string, body?: unknown) => { status: number; json: unknown },
): { transport: Transport; calls: Call[] } {
  const calls: Call[] = [];
  const transport: Transport = async (method, path, body) => {
    calls.push({ method, path, body });
    return respond(method, path, body);
  };
  return { transport, calls };
}

describe("SessionApi", () => {
  it("lists domains", async () => {
    const { transport, calls } = fakeTransport(() => ({
      status: 200,
      json: { v: 1, domains: [DOMAIN] },
    }));
    const api = new SessionApi(transport);
    const domains = await api.listDomains();
    expect(domains).toEqual([DOMAIN]);
    expect(calls).toEqual([{ method: "GET", path: "/domains", body: undefined }]);
  });

  it("creates sessions with a versioned payload", async () => {
    const { transport, calls } = fakeTransport(() => ({
      status: 200,
      json: { v: 1, id: "abc", snapshot: turn().snapshot },
    }));
    const api = new SessionApi(transport);
    const created = await api.createSession({ domain: "kitchen", sr: 0.8, seed: 7 });
    expect(created.id).toBe("abc");
    expect(calls[0].body).toEqual({ v: 1, domain: "kitchen", sr: 0.8, seed: 7 });
  });

  it("posts steps and utterances to the session routes", async () => {
    const { transport, calls } = fakeTransport(() => ({ status: 200, json: turn() }));
    const api = new SessionApi(transport);
    await api.submitStep("s1", "use_soap");
    await api.submitUtterance("s1", "yes");
    expect(calls[0]).toEqual({
      method: "POST",
      path: "/sessions/s1/step",
      body: { v: 1, action: "use_soap" },
    });
    expect(calls[1]).toEqual({
      method: "POST",
      path: "/sessions/s1/utterance",
      body: { v: 1, text: "yes" },
    });
  });

  it("raises ApiError with the server detail on 4xx", async () => {
    const { transport } = fakeTransport(() => ({
      status: 404,
      json: { detail: "unknown primitive: 'dance'" },
    }));
    const api = new SessionApi(transport);
    const err = await api.submitStep("s1", "dance").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
    expect((err as ApiError).message).toContain("unknown primitive");
  });

  it("falls back to a generic message when the error body is empty", async () => {
    const { transport } = fakeTransport(() => ({ status: 500, json: null }));
    const api = new SessionApi(transport);
    const err = await api.getSession("s1").catch((e: unknown) => e);
    expect((err as ApiError).message).toBe("HTTP 500");
  });
});

/** Client contract against the running service. */
import { describe, expect, it } from "vitest";
import { DialogueClient, ServiceError } from "../src/api.js";
import { BASE } from "./config.js";

const client = new DialogueClient(BASE);

const HAPPY_TURNS = [
  "i want to go from milan to rome",
  "on monday",
  "at seven",
  "yes please",
];

describe("service client", () => {
  it("reports health", async () => {
    const health = await client.health();
    expect(health.status).toBe("ok");
  });

  it("lists 20 scenarios with goal fields", async () => {
    const scenarios = await client.scenarios();
    expect(scenarios).toHaveLength(20);
    for (const s of scenarios) {
      expect(Object.keys(s).sort()).toEqual([
        "arrival",
        "date",
        "date_phrase",
        "departure",
        "id",
        "time",
        "time_phrase",
      ]);
      expect(s.departure).not.toBe(s.arrival);
    }
  });

  it("echoes creation options in the descriptor", async () => {
    const body = await client.createSession({ p_sub: 0.3, seed: 11 });
    expect(body.version).toBe(0);
    expect(body.closed).toBe(false);
    expect(body.noise).toEqual({ p_sub: 0.3, p_del: 0, p_ins: 0 });
    expect(body.seed).toBe(11);
    expect(body.expectation.state_tag).toBe("ask_departure");
    expect(body.last_turn.system_text).toContain("Welcome");
  });

  it("drives a noiseless dialogue to S and serves intermediates", async () => {
    let body = await client.createSession({ seed: 0 });
    for (const text of HAPPY_TURNS) {
      const response = await client.postTurn(
        body.session_id,
        text,
        body.version,
      );
      body = response;
      expect(response.turn.network).not.toBeNull();
      expect(response.turn.decode_ok).toBe(true);
      expect(response.turn.frame).not.toBeNull();
    }
    expect(body.closed).toBe(true);
    expect(body.outcome).toBe("S");
    const state = await client.getSession(body.session_id);
    expect(state.transcript).toHaveLength(5);
  });

  it("rejects stale versions with a conflict error", async () => {
    const body = await client.createSession({});
    await client.postTurn(body.session_id, "from milan to rome", 0);
    const stale = client.postTurn(body.session_id, "on monday", 0);
    await expect(stale).rejects.toMatchObject({
      name: "ServiceError",
      status: 409,
      code: "conflict",
    });
  });

  it("rejects turns on a closed session", async () => {
    let body = await client.createSession({ seed: 0 });
    for (const text of HAPPY_TURNS) {
      body = await client.postTurn(body.session_id, text, body.version);
    }
    await expect(
      client.postTurn(body.session_id, "hello", body.version),
    ).rejects.toMatchObject({ status: 409, code: "conflict" });
  });

  it("maps invalid creation options to bad-request", async () => {
    await expect(
      client.createSession({ p_sub: 2.0 }),
    ).rejects.toMatchObject({ status: 400, code: "bad-request" });
  });

  it("maps unknown sessions to not-found", async () => {
    const missing = client.getSession("no-such-session");
    await expect(missing).rejects.toSatisfy(
      (error: unknown) =>
        error instanceof ServiceError &&
        error.status === 404 &&
        error.code === "not-found",
    );
  });
});

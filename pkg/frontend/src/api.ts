/** Typed client for the dialogue service. Every value the console displays
 * originates from one of these responses; the client never recomputes
 * pipeline results. */

export interface SlotView {
  value: string | null;
  status: "empty" | "hypothesized" | "confirmed";
  score: number;
}

export interface ExpectationView {
  state_tag: string;
  expected_kinds: string[];
  predicted_classes: string[];
  strength: string;
}

export interface NetworkSlot {
  alternatives: [string, number][];
  inserted: boolean;
}

export interface ConceptRow {
  kind: string;
  value: string;
  span: [number, number];
  score: number;
}

export interface FrameView {
  speech_act: string;
  slots: Record<string, string>;
  residue: [number, number][];
}

export interface TurnRecord {
  turn_index: number;
  user_text: string | null;
  reference_tokens: string[];
  hypothesis_tokens: string[];
  decode_ok: boolean;
  decode_mode: string;
  lm_state_tag: string;
  expectation_tag: string;
  noise_applied: boolean;
  symptom: string | null;
  user_speech_act: string | null;
  system_act_type: string;
  system_text: string;
  system_referenced_slots: string[];
  next_state_tag: string;
  slots: Record<string, SlotView>;
  phase: string;
  outcome: string;
  network: NetworkSlot[] | null;
  concepts: ConceptRow[];
  frame: FrameView | null;
}

export interface NoiseView {
  p_sub: number;
  p_del: number;
  p_ins: number;
}

export interface SessionBody {
  session_id: string;
  version: number;
  closed: boolean;
  outcome: string;
  phase: string;
  turn_count: number;
  slots: Record<string, SlotView>;
  failure_counters: Record<string, number>;
  expectation: ExpectationView;
  noise: NoiseView;
  noise_target: string;
  use_dialogue_lm: boolean;
  seed: number;
  isolated_mode: boolean;
  last_turn: TurnRecord;
  transcript?: TurnRecord[];
}

export interface TurnResponse extends SessionBody {
  turn: TurnRecord;
}

export interface Scenario {
  id: string;
  departure: string;
  arrival: string;
  date_phrase: string;
  time_phrase: string;
  date: string;
  time: string;
}

export interface CreateOptions {
  p_sub?: number;
  p_del?: number;
  p_ins?: number;
  noise_target?: string;
  use_dialogue_lm?: boolean;
  seed?: number;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export class DialogueClient {
  constructor(private baseUrl: string) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await response.json().catch(() => null);
    if (!response.ok) {
      const err = (data as { error?: { code?: string; message?: string } })
        ?.error;
      throw new ServiceError(
        response.status,
        err?.code ?? "unknown",
        err?.message ?? response.statusText,
      );
    }
    return data as T;
  }

  health(): Promise<{ status: string; sessions: number }> {
    return this.request("GET", "/health");
  }

  async scenarios(): Promise<Scenario[]> {
    const body = await this.request<{ scenarios: Scenario[] }>(
      "GET",
      "/scenarios",
    );
    return body.scenarios;
  }

  createSession(options: CreateOptions = {}): Promise<SessionBody> {
    return this.request("POST", "/sessions", options);
  }

  getSession(sessionId: string): Promise<SessionBody> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  postTurn(
    sessionId: string,
    text: string,
    version: number,
  ): Promise<TurnResponse> {
    return this.request("POST", `/sessions/${sessionId}/turns`, {
      text,
      version,
    });
  }
}

/** Console application: one active session per page, chat on the left,
 * per-turn pipeline inspector on the right, session controls below.
 * Controls only take effect when a new session is created. */

import {
  DialogueClient,
  ServiceError,
  type Scenario,
  type SessionBody,
  type TurnRecord,
} from "./api.js";
import {
  SHELL_HTML,
  renderBanner,
  renderConceptsPanel,
  renderFramePanel,
  renderNetworkPanel,
  renderStatePanel,
} from "./render.js";

export class App {
  readonly client: DialogueClient;
  body: SessionBody | null = null;
  scenarios: Scenario[] = [];

  private root: HTMLElement;
  private inFlight = false;
  private pending: Promise<unknown> = Promise.resolve();

  constructor(root: HTMLElement, baseUrl: string) {
    this.root = root;
    this.client = new DialogueClient(baseUrl);
    root.innerHTML = SHELL_HTML;
    this.bind();
  }

  private el<T extends HTMLElement>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node;
  }

  private bind(): void {
    this.el<HTMLFormElement>("#composer").addEventListener("submit", (ev) => {
      ev.preventDefault();
      const input = this.el<HTMLInputElement>("#utterance");
      this.pending = this.send(input.value).then((sent) => {
        if (sent) input.value = "";
      });
    });
    this.el<HTMLButtonElement>("#new-session").addEventListener(
      "click",
      () => {
        this.pending = this.newSession();
      },
    );
    for (const id of ["#p-sub", "#p-del", "#p-ins"]) {
      const slider = this.el<HTMLInputElement>(id);
      slider.addEventListener("input", () => {
        this.el<HTMLOutputElement>(`${id}-out`).textContent = slider.value;
        this.updateControlsNote();
      });
    }
    this.el<HTMLSelectElement>("#scenario").addEventListener("change", () =>
      this.renderGoalCard(),
    );
    this.el<HTMLElement>("#tabs").addEventListener("click", (ev) => {
      const button = (ev.target as HTMLElement).closest("button[data-tab]");
      if (button) this.selectTab((button as HTMLElement).dataset.tab!);
    });
  }

  /** Resolves once every in-flight request chain has settled. */
  async whenIdle(): Promise<void> {
    let last: Promise<unknown> | undefined;
    while (this.pending !== last) {
      last = this.pending;
      await last.catch(() => {});
    }
  }

  async init(): Promise<void> {
    this.scenarios = await this.client.scenarios();
    const select = this.el<HTMLSelectElement>("#scenario");
    for (const s of this.scenarios) {
      const option = document.createElement("option");
      option.value = s.id;
      option.textContent = `${s.id}: ${s.departure} to ${s.arrival}`;
      select.appendChild(option);
    }
    await this.newSession();
  }

  controlValues(): {
    p_sub: number;
    p_del: number;
    p_ins: number;
    seed: number;
  } {
    return {
      p_sub: Number(this.el<HTMLInputElement>("#p-sub").value),
      p_del: Number(this.el<HTMLInputElement>("#p-del").value),
      p_ins: Number(this.el<HTMLInputElement>("#p-ins").value),
      seed: Number(this.el<HTMLInputElement>("#seed").value) || 0,
    };
  }

  async newSession(): Promise<void> {
    this.clearError();
    const body = await this.client.createSession(this.controlValues());
    this.body = body;
    this.el<HTMLElement>("#transcript").innerHTML = "";
    this.appendSystemBubble(body.last_turn);
    this.applyBody(body);
    this.updateControlsNote();
  }

  /** One request per send; empty text and closed sessions are blocked
   * client-side. Returns whether a turn was submitted. */
  async send(text: string): Promise<boolean> {
    if (!this.body || this.inFlight) return false;
    if (!text.trim()) return false;
    if (this.body.closed) return false;
    this.inFlight = true;
    this.setComposerEnabled(false);
    this.clearError();
    this.appendUserBubble(text);
    try {
      const response = await this.client.postTurn(
        this.body.session_id,
        text,
        this.body.version,
      );
      this.appendSystemBubble(response.turn);
      this.body = response;
      this.applyBody(response);
      return true;
    } catch (error) {
      this.showError(error);
      return false;
    } finally {
      this.inFlight = false;
      this.setComposerEnabled(!this.body || !this.body.closed);
    }
  }

  selectTab(name: string): void {
    for (const button of this.root.querySelectorAll<HTMLElement>(
      "#tabs button",
    )) {
      button.classList.toggle("active", button.dataset.tab === name);
    }
    for (const panel of this.root.querySelectorAll<HTMLElement>(".panel")) {
      panel.hidden = panel.id !== `panel-${name}`;
    }
  }

  private applyBody(body: SessionBody): void {
    renderNetworkPanel(this.el("#panel-network"), body.last_turn);
    renderConceptsPanel(this.el("#panel-concepts"), body.last_turn);
    renderFramePanel(this.el("#panel-frame"), body.last_turn);
    renderStatePanel(this.el("#panel-state"), body);
    renderBanner(this.el("#banner"), body);
    this.el("#session-label").querySelector("[data-field]")!.textContent =
      body.session_id;
    this.setComposerEnabled(!body.closed);
  }

  private setComposerEnabled(enabled: boolean): void {
    this.el<HTMLInputElement>("#utterance").disabled = !enabled;
    this.el<HTMLButtonElement>("#send").disabled = !enabled;
  }

  private appendUserBubble(text: string): void {
    const bubble = document.createElement("div");
    bubble.className = "bubble user";
    bubble.textContent = text;
    this.el("#transcript").appendChild(bubble);
  }

  private appendSystemBubble(turn: TurnRecord): void {
    const bubble = document.createElement("div");
    bubble.className = "bubble system";
    bubble.textContent = turn.system_text;
    if (turn.symptom) {
      const badge = document.createElement("em");
      badge.className = "symptom";
      badge.textContent = ` [${turn.symptom}]`;
      bubble.appendChild(badge);
    }
    this.el("#transcript").appendChild(bubble);
  }

  private renderGoalCard(): void {
    const card = this.el("#goal-card");
    const id = this.el<HTMLSelectElement>("#scenario").value;
    const scenario = this.scenarios.find((s) => s.id === id);
    if (!scenario) {
      card.hidden = true;
      card.textContent = "";
      return;
    }
    card.hidden = false;
    card.textContent =
      `goal: ${scenario.departure} to ${scenario.arrival}, ` +
      `${scenario.date_phrase} (${scenario.date}), ` +
      `${scenario.time_phrase} (${scenario.time})`;
  }

  /** Sliders never touch the running session; say so when they diverge. */
  private updateControlsNote(): void {
    const note = this.el("#controls-note");
    if (!this.body) {
      note.hidden = true;
      return;
    }
    const controls = this.controlValues();
    note.hidden =
      controls.p_sub === this.body.noise.p_sub &&
      controls.p_del === this.body.noise.p_del &&
      controls.p_ins === this.body.noise.p_ins;
  }

  private showError(error: unknown): void {
    const line = this.el("#error-line");
    line.hidden = false;
    if (error instanceof ServiceError) {
      line.textContent = `${error.code}: ${error.message}`;
      line.dataset.code = error.code;
    } else {
      line.textContent = String(error);
      line.dataset.code = "network";
    }
  }

  private clearError(): void {
    const line = this.el("#error-line");
    line.hidden = true;
    line.textContent = "";
    line.removeAttribute("data-code");
  }
}

/** DOM rendering for the console. Panels are pure projections of the latest
 * service body: every leaf value lands in an element tagged with
 * data-field="<json path>", which is what the contract tests walk. */

import type { SessionBody, TurnRecord } from "./api.js";

export const SHELL_HTML = `
<header id="top">
  <h1>train timetable console</h1>
  <span id="session-label">session <code data-field="session_id"></code></span>
</header>
<main>
  <section id="chat">
    <div id="goal-card" hidden></div>
    <div id="transcript"></div>
    <div id="banner" hidden></div>
    <div id="error-line" hidden></div>
    <form id="composer">
      <input id="utterance" autocomplete="off"
             placeholder="type an utterance and press enter" />
      <button id="send" type="submit">Send</button>
    </form>
  </section>
  <section id="inspector">
    <nav id="tabs">
      <button type="button" data-tab="network" class="active">Network</button>
      <button type="button" data-tab="concepts">Concepts</button>
      <button type="button" data-tab="frame">Frame</button>
      <button type="button" data-tab="state">State</button>
    </nav>
    <div id="panel-network" class="panel"></div>
    <div id="panel-concepts" class="panel" hidden></div>
    <div id="panel-frame" class="panel" hidden></div>
    <div id="panel-state" class="panel" hidden></div>
  </section>
</main>
<footer id="controls">
  <label>p_sub <input id="p-sub" type="range" min="0" max="1" step="0.05" value="0" />
    <output id="p-sub-out">0</output></label>
  <label>p_del <input id="p-del" type="range" min="0" max="1" step="0.05" value="0" />
    <output id="p-del-out">0</output></label>
  <label>p_ins <input id="p-ins" type="range" min="0" max="1" step="0.05" value="0" />
    <output id="p-ins-out">0</output></label>
  <label>seed <input id="seed" type="number" value="0" /></label>
  <label>goal <select id="scenario"><option value="">free choice</option></select></label>
  <button id="new-session" type="button">New session</button>
  <span id="controls-note" hidden>noise settings apply to the next session</span>
</footer>
`;

/** One formatting rule for every served leaf value. */
export function fmt(value: unknown): string {
  if (value === null || value === undefined) return "";
  if (Array.isArray(value)) return value.map(fmt).join(", ");
  return String(value);
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function field(path: string, value: unknown): string {
  return `<span data-field="${path}">${esc(fmt(value))}</span>`;
}

const SLOT_ORDER = ["departure", "arrival", "date", "time"];

export function renderStatePanel(panel: HTMLElement, body: SessionBody): void {
  const t = body.last_turn;
  const slotRows = SLOT_ORDER.map(
    (name) => `<tr><th>${name}</th>
      <td>${field(`slots.${name}.value`, body.slots[name]?.value)}</td>
      <td class="status-${body.slots[name]?.status}">${field(
        `slots.${name}.status`,
        body.slots[name]?.status,
      )}</td>
      <td>${field(`slots.${name}.score`, body.slots[name]?.score)}</td>
      <td>${field(
        `failure_counters.${name}`,
        body.failure_counters[name],
      )}</td></tr>`,
  ).join("");
  panel.innerHTML = `
  <h3>slots</h3>
  <table id="slot-table">
    <thead><tr><th>slot</th><th>value</th><th>status</th><th>score</th>
      <th>failures</th></tr></thead>
    <tbody>${slotRows}</tbody>
  </table>
  <h3>expectation</h3>
  <dl>
    <dt>state tag</dt><dd>${field("expectation.state_tag", body.expectation.state_tag)}</dd>
    <dt>expected kinds</dt><dd>${field("expectation.expected_kinds", body.expectation.expected_kinds)}</dd>
    <dt>predicted classes</dt><dd>${field("expectation.predicted_classes", body.expectation.predicted_classes)}</dd>
    <dt>strength</dt><dd>${field("expectation.strength", body.expectation.strength)}</dd>
  </dl>
  <h3>session</h3>
  <dl>
    <dt>version</dt><dd>${field("version", body.version)}</dd>
    <dt>closed</dt><dd>${field("closed", body.closed)}</dd>
    <dt>outcome</dt><dd>${field("outcome", body.outcome)}</dd>
    <dt>phase</dt><dd>${field("phase", body.phase)}</dd>
    <dt>turn count</dt><dd>${field("turn_count", body.turn_count)}</dd>
    <dt>isolated mode</dt><dd>${field("isolated_mode", body.isolated_mode)}</dd>
    <dt>p_sub</dt><dd>${field("noise.p_sub", body.noise.p_sub)}</dd>
    <dt>p_del</dt><dd>${field("noise.p_del", body.noise.p_del)}</dd>
    <dt>p_ins</dt><dd>${field("noise.p_ins", body.noise.p_ins)}</dd>
    <dt>noise target</dt><dd>${field("noise_target", body.noise_target)}</dd>
    <dt>dialogue LM</dt><dd>${field("use_dialogue_lm", body.use_dialogue_lm)}</dd>
    <dt>seed</dt><dd>${field("seed", body.seed)}</dd>
  </dl>
  <h3>last turn</h3>
  <dl>
    <dt>turn index</dt><dd>${field("last_turn.turn_index", t.turn_index)}</dd>
    <dt>user text</dt><dd>${field("last_turn.user_text", t.user_text)}</dd>
    <dt>reference</dt><dd>${field("last_turn.reference_tokens", t.reference_tokens)}</dd>
    <dt>hypothesis</dt><dd>${field("last_turn.hypothesis_tokens", t.hypothesis_tokens)}</dd>
    <dt>decode ok</dt><dd>${field("last_turn.decode_ok", t.decode_ok)}</dd>
    <dt>decode mode</dt><dd>${field("last_turn.decode_mode", t.decode_mode)}</dd>
    <dt>LM state tag</dt><dd>${field("last_turn.lm_state_tag", t.lm_state_tag)}</dd>
    <dt>expectation tag</dt><dd>${field("last_turn.expectation_tag", t.expectation_tag)}</dd>
    <dt>noise applied</dt><dd>${field("last_turn.noise_applied", t.noise_applied)}</dd>
    <dt>symptom</dt><dd>${field("last_turn.symptom", t.symptom)}</dd>
    <dt>user speech act</dt><dd>${field("last_turn.user_speech_act", t.user_speech_act)}</dd>
    <dt>system act</dt><dd>${field("last_turn.system_act_type", t.system_act_type)}</dd>
    <dt>system text</dt><dd>${field("last_turn.system_text", t.system_text)}</dd>
    <dt>referenced slots</dt><dd>${field("last_turn.system_referenced_slots", t.system_referenced_slots)}</dd>
    <dt>next state tag</dt><dd>${field("last_turn.next_state_tag", t.next_state_tag)}</dd>
    <dt>phase</dt><dd>${field("last_turn.phase", t.phase)}</dd>
    <dt>outcome</dt><dd>${field("last_turn.outcome", t.outcome)}</dd>
  </dl>`;
}

export function renderNetworkPanel(panel: HTMLElement, turn: TurnRecord): void {
  if (!turn.network) {
    panel.innerHTML = `<p class="placeholder">no confusion network this turn</p>`;
    return;
  }
  // non-inserted slots consume reference tokens in order; when the truth is
  // served, the matching alternative is highlighted
  let refIndex = 0;
  const rows = turn.network.map((slot, i) => {
    const truth =
      !slot.inserted && refIndex < turn.reference_tokens.length
        ? turn.reference_tokens[refIndex++]
        : null;
    const chips = slot.alternatives
      .map(([word, score]) => {
        const cls = truth !== null && word === truth ? "alt truth" : "alt";
        return `<span class="${cls}">${esc(word)} <small>${score.toFixed(
          2,
        )}</small></span>`;
      })
      .join("");
    const badge = slot.inserted ? ` <em class="inserted">inserted</em>` : "";
    return `<tr class="network-row"><th>${i}</th><td>${chips}${badge}</td></tr>`;
  });
  panel.innerHTML = `<table id="network-table"><tbody>${rows.join(
    "",
  )}</tbody></table>`;
}

export function renderConceptsPanel(
  panel: HTMLElement,
  turn: TurnRecord,
): void {
  if (!turn.decode_ok) {
    panel.innerHTML = `<p class="placeholder">nothing decoded this turn</p>`;
    return;
  }
  const covered = new Set<number>();
  for (const c of turn.concepts) {
    for (let t = c.span[0]; t < c.span[1]; t++) covered.add(t);
  }
  const tokens = turn.hypothesis_tokens
    .map((w, t) =>
      covered.has(t)
        ? `<u class="covered">${esc(w)}</u>`
        : `<span>${esc(w)}</span>`,
    )
    .join(" ");
  const rows = turn.concepts
    .map(
      (c, i) => `<tr class="concept-row">
      <td data-concept="${i}.kind">${esc(c.kind)}</td>
      <td data-concept="${i}.value">${esc(c.value)}</td>
      <td data-concept="${i}.span">${c.span[0]}..${c.span[1]}</td>
      <td data-concept="${i}.score">${fmt(c.score)}</td></tr>`,
    )
    .join("");
  panel.innerHTML = `
  <p id="spanned-utterance">${tokens || '<span class="placeholder">(empty)</span>'}</p>
  <table id="concept-table">
    <thead><tr><th>kind</th><th>value</th><th>span</th><th>score</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

export function renderFramePanel(panel: HTMLElement, turn: TurnRecord): void {
  if (!turn.frame) {
    panel.innerHTML = `<p class="placeholder">no case frame this turn</p>`;
    return;
  }
  const rows = Object.entries(turn.frame.slots)
    .map(
      ([kind, value]) => `<tr class="frame-row">
      <th>${esc(kind)}</th><td data-frame-slot="${esc(kind)}">${esc(
        value,
      )}</td></tr>`,
    )
    .join("");
  const residue = turn.frame.residue
    .map(([a, b]) => `${a}..${b}`)
    .join(", ");
  panel.innerHTML = `
  <dl><dt>speech act</dt><dd id="frame-act">${esc(turn.frame.speech_act)}</dd></dl>
  <table id="frame-table"><tbody>${rows ||
    '<tr><td class="placeholder">no slots</td></tr>'}</tbody></table>
  <p id="frame-residue">residue: ${residue || "none"}</p>`;
}

export function renderBanner(banner: HTMLElement, body: SessionBody): void {
  if (!body.closed) {
    banner.hidden = true;
    banner.removeAttribute("data-outcome");
    return;
  }
  const labels: Record<string, string> = {
    S: "task completed",
    SC: "completed with relaxed constraints",
    SF: "task failed",
  };
  banner.hidden = false;
  banner.dataset.outcome = body.outcome;
  banner.className = `outcome-${body.outcome}`;
  banner.textContent = `${body.outcome} — ${labels[body.outcome] ?? "closed"}`;
}

/** DOM wiring: creation form, event polling, click handlers. The server is
 * authoritative — every turn payload replaces the view model wholesale. */

import { ApiError, fetchTransport, SessionApi, type DomainInfo } from "./api.js";
import {
  renderBeliefPanel,
  renderError,
  renderGroundTruth,
  renderPalette,
  renderQuestionCard,
  renderTranscript,
} from "./render.js";
import {
  applyError,
  applyTurn,
  applyUserLine,
  fromSessionState,
  setGroundTruth,
  type SessionViewModel,
} from "./viewmodel.js";

const api = new SessionApi(fetchTransport(""));

let vm: SessionViewModel | null = null;
let lastSuggested: string | null = null;
let revealTruth = false;

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el;
}

function draw(): void {
  if (vm === null) return;
  $("belief").innerHTML = renderBeliefPanel(vm);
  $("palette").innerHTML = renderPalette(vm, lastSuggested);
  $("chat").innerHTML =
    renderTranscript(vm) + renderQuestionCard(vm) + renderError(vm);
  $("truth").innerHTML = renderGroundTruth(vm);
  $("step-counter").textContent = `step ${vm.step}`;
}

function fail(e: unknown): void {
  if (vm === null) return;
  const msg = e instanceof ApiError ? `${e.status}: ${e.message}` : String(e);
  vm = applyError(vm, msg);
  draw();
}

async function refreshTruth(): Promise<void> {
  if (vm === null) return;
  if (!revealTruth) {
    vm = setGroundTruth(vm, null);
    return;
  }
  const state = await api.getSession(vm.sessionId);
  vm = setGroundTruth(vm, state.ground_truth);
}

async function doStep(action: string): Promise<void> {
  if (vm === null || vm.busy) return;
  vm = applyUserLine(vm, "step", `(did ${action})`);
  draw();
  try {
    const turn = await api.submitStep(vm.sessionId, action);
    lastSuggested = turn.kind === "inform" ? turn.target : null;
    vm = applyTurn(vm, turn);
    await refreshTruth();
  } catch (e) {
    fail(e);
    return;
  }
  draw();
}

async function doAnswer(text: string): Promise<void> {
  if (vm === null || vm.busy || vm.pendingQuestion === null) return;
  vm = applyUserLine(vm, "answer", text);
  draw();
  try {
    const turn = await api.submitUtterance(vm.sessionId, text);
    lastSuggested = turn.kind === "inform" ? turn.target : null;
    vm = applyTurn(vm, turn);
  } catch (e) {
    fail(e);
    return;
  }
  draw();
}

async function startSession(domain: DomainInfo, sr: number): Promise<void> {
  const created = await api.createSession({ domain: domain.name, sr });
  const state = await api.getSession(created.id);
  vm = fromSessionState(domain, state);
  $("setup").hidden = true;
  $("console").hidden = false;
  draw();
}

async function boot(): Promise<void> {
  const domains = await api.listDomains();
  const select = $("domain") as HTMLSelectElement;
  select.innerHTML = domains
    .map((d) => `<option value="${d.name}">${d.name}</option>`)
    .join("");

  const srSlider = $("sr") as HTMLInputElement;
  srSlider.addEventListener("input", () => {
    $("sr-value").textContent = srSlider.value;
  });

  $("start").addEventListener("click", () => {
    const domain = domains.find((d) => d.name === select.value);
    if (domain !== undefined) void startSession(domain, Number(srSlider.value));
  });

  ($("reveal") as HTMLInputElement).addEventListener("change", (ev) => {
    revealTruth = (ev.target as HTMLInputElement).checked;
    void refreshTruth().then(draw);
  });

  document.body.addEventListener("click", (ev) => {
    const el = ev.target as HTMLElement;
    const action = el.dataset.action;
    if (action !== undefined) void doStep(action);
    const reply = el.dataset.reply;
    if (reply !== undefined) void doAnswer(reply);
    if (el.classList.contains("send")) {
      const box = document.querySelector<HTMLInputElement>(".free-text");
      if (box !== null && box.value.trim() !== "") void doAnswer(box.value.trim());
    }
  });
}

void boot();

/** HTML renderers for the console. Pure string builders, no DOM access,
 * so they run under plain node tests. */

import type { Bar, SessionViewModel } from "./viewmodel.js";

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function pct(p: number): string {
  return (100 * p).toFixed(1) + "%";
}

export function renderBars(bars: Bar[], cls: string): string {
  const rows = bars
    .map(
      (b) =>
        `<div class="bar-row"><span class="bar-label">${esc(b.label)}</span>` +
        `<span class="bar ${cls}" style="width:${pct(b.prob)}"></span>` +
        `<span class="bar-num">${pct(b.prob)}</span></div>`,
    )
    .join("");
  return `<div class="bars">${rows}</div>`;
}

/** Action buttons grouped by goal subtree; the suggested action (from the
 * latest Inform) gets a highlight class. */
export function renderPalette(vm: SessionViewModel, suggested: string | null): string {
  const groups = Object.entries(vm.domain.primitives_by_goal)
    .map(([goal, prims]) => {
      const buttons = prims
        .map((p) => {
          const hl = p === suggested ? " suggested" : "";
          const dis = vm.busy ? " disabled" : "";
          return `<button class="act${hl}" data-action="${esc(p)}"${dis}>${esc(p)}</button>`;
        })
        .join("");
      return `<fieldset class="goal-group"><legend>${esc(goal)}</legend>${buttons}</fieldset>`;
    })
    .join("");
  return `<div class="palette">${groups}</div>`;
}

export function renderTranscript(vm: SessionViewModel): string {
  const lines = vm.transcript
    .map((e) => `<div class="msg ${e.role} ${e.kind}">${esc(e.text)}</div>`)
    .join("");
  return `<div class="transcript">${lines}</div>`;
}

/** Question card: quick replies send the literal tokens "yes" / "no". */
export function renderQuestionCard(vm: SessionViewModel): string {
  if (vm.pendingQuestion === null) return "";
  const dis = vm.busy ? " disabled" : "";
  return (
    `<div class="question-card">` +
    `<p>Did you just do <strong>${esc(vm.pendingQuestion)}</strong>?</p>` +
    `<button class="quick" data-reply="yes"${dis}>Yes</button>` +
    `<button class="quick" data-reply="no"${dis}>No</button>` +
    `<input class="free-text" type="text" placeholder="or answer in words"${dis}>` +
    `<button class="send"${dis}>Send</button>` +
    `</div>`
  );
}

export function renderError(vm: SessionViewModel): string {
  return vm.error === null ? "" : `<div class="error">${esc(vm.error)}</div>`;
}

export function renderGroundTruth(vm: SessionViewModel): string {
  if (vm.groundTruth === null) return "";
  const rows = Object.entries(vm.groundTruth)
    .map(([v, val]) => `<li class="${val ? "on" : "off"}">${esc(v)}: ${val ? "T" : "F"}</li>`)
    .join("");
  return `<ul class="ground-truth">${rows}</ul>`;
}

export function renderBeliefPanel(vm: SessionViewModel): string {
  return (
    `<section class="belief">` +
    `<h3>Goals</h3>${renderBars(vm.goalBars, "goal")}` +
    `<h3>Last action (top ${vm.actionBars.length})</h3>${renderBars(vm.actionBars, "action")}` +
    `<details><summary>Full action distribution</summary>` +
    `${renderBars(vm.actionBarsFull, "action")}</details>` +
    `<h3>World marginals</h3>${renderBars(vm.worldBars, "world")}` +
    `</section>`
  );
}

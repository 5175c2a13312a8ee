import { ApiClient } from "./api.js";
import { EditorController } from "./controller.js";
import { adjustCaret } from "./state.js";

const API_BASE = (window as unknown as { VISPELL_API?: string }).VISPELL_API ?? "";

const controller = new EditorController(new ApiClient(API_BASE));

const editor = document.getElementById("editor") as HTMLTextAreaElement;
const backdrop = document.getElementById("backdrop") as HTMLDivElement;
const checkBtn = document.getElementById("check-btn") as HTMLButtonElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const popover = document.getElementById("popover") as HTMLDivElement;
const status = document.getElementById("status") as HTMLSpanElement;

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function render(): void {
  const { state } = controller;
  banner.hidden = controller.banner === null;
  banner.textContent = controller.banner ?? "";

  const text = state.rawText;
  if (!state.lastResponse) {
    backdrop.innerHTML = escapeHtml(text);
    return;
  }
  const active = new Set(state.activeHighlights());
  let html = "";
  let cursor = 0;
  for (const [i, tok] of state.lastResponse.tokens.entries()) {
    if (!active.has(i) || tok.start < cursor || tok.end > text.length) continue;
    const alpha = (0.25 + 0.55 * tok.p_error).toFixed(2);
    const cls = state.dirty ? "mark stale" : "mark";
    html += escapeHtml(text.slice(cursor, tok.start));
    html += `<mark class="${cls}" data-idx="${i}" ` +
            `style="background: rgba(255, 99, 71, ${alpha})">` +
            escapeHtml(text.slice(tok.start, tok.end)) + "</mark>";
    cursor = tok.end;
  }
  html += escapeHtml(text.slice(cursor));
  backdrop.innerHTML = html;
}

function hidePopover(): void {
  popover.hidden = true;
  popover.innerHTML = "";
}

function showPopover(index: number): void {
  const tok = controller.state.tokenAt(index);
  const items = tok.suggestions
    .map(s => `<button class="suggestion" data-idx="${index}" data-word="${escapeHtml(s.word)}">` +
              `${escapeHtml(s.word)} <small>${(s.prob * 100).toFixed(1)}%</small></button>`)
    .join("");
  popover.innerHTML =
    `<div class="pop-title">“${escapeHtml(tok.token)}” - p(error) ${(tok.p_error * 100).toFixed(1)}%</div>` +
    items +
    `<button class="dismiss" data-idx="${index}">keep as written</button>`;
  popover.hidden = false;
}

function tokenIndexAtCaret(): number | null {
  const pos = editor.selectionStart;
  for (const i of controller.state.activeHighlights()) {
    const tok = controller.state.tokenAt(i);
    if (pos >= tok.start && pos <= tok.end) return i;
  }
  return null;
}

async function runCheck(): Promise<void> {
  status.textContent = "checking…";
  checkBtn.disabled = true;
  const applied = await controller.check();
  checkBtn.disabled = false;
  if (applied) {
    const resp = controller.state.lastResponse!;
    const flagged = controller.state.activeHighlights().length;
    status.textContent =
      `${flagged} flagged · model ${resp.model_version} · ${resp.latency_ms.toFixed(0)} ms` +
      (resp.truncated ? " · input truncated" : "");
  } else {
    status.textContent = "";
  }
  hidePopover();
  render();
}

editor.addEventListener("input", () => {
  controller.setText(editor.value);
  hidePopover();
  render();
});

editor.addEventListener("click", () => {
  const idx = tokenIndexAtCaret();
  if (idx !== null) showPopover(idx);
  else hidePopover();
});

editor.addEventListener("scroll", () => {
  backdrop.scrollTop = editor.scrollTop;
  backdrop.scrollLeft = editor.scrollLeft;
});

editor.addEventListener("keydown", ev => {
  if ((ev.ctrlKey || ev.metaKey) && ev.key === "Enter") {
    ev.preventDefault();
    void runCheck();
  }
  if (ev.key === "Escape") hidePopover();
});

checkBtn.addEventListener("click", () => void runCheck());

popover.addEventListener("click", ev => {
  const target = ev.target as HTMLElement;
  const idxAttr = target.getAttribute("data-idx");
  if (idxAttr === null) return;
  const index = Number(idxAttr);
  const caret = editor.selectionStart;
  if (target.classList.contains("suggestion")) {
    const word = target.getAttribute("data-word") ?? "";
    const tok = controller.state.tokenAt(index);
    const span = { start: tok.start, end: tok.end };
    controller.accept(index, word);
    editor.value = controller.state.rawText;
    const newCaret = adjustCaret(caret, span.start, span.end, word.length);
    editor.setSelectionRange(newCaret, newCaret);
  } else if (target.classList.contains("dismiss")) {
    controller.dismiss(index);
  }
  editor.focus();
  hidePopover();
  render();
});

void (async () => {
  try {
    const health = await new ApiClient(API_BASE).health();
    status.textContent = health.status === "ok"
      ? `model ${health.model_version} ready`
      : "service is loading…";
  } catch {
    controller.banner = "Cannot reach the correction service.";
    render();
  }
})();

render();

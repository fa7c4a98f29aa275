/** Console modal state: opens exactly when the simulation awaits input. */

import type { StatePayload, TranscriptEventJson } from "./types.js";

export interface ConsoleView {
  open: boolean;
  promptKind: string | null;
  promptCycle: number | null;
  rejectedMessage: string | null;
  lines: { direction: "out" | "in"; text: string; replayed: boolean }[];
}

export function buildConsoleView(payload: StatePayload): ConsoleView {
  const pending = payload.transcript.pending_prompt;
  const open = payload.status === "awaiting_input";
  return {
    open,
    promptKind: open && pending ? pending.kind : null,
    promptCycle: open && pending ? pending.cycle : null,
    rejectedMessage: payload.input_rejected ? payload.input_rejected.message : null,
    lines: payload.transcript.events.map((e: TranscriptEventJson) => ({
      direction: e.direction,
      text: e.text,
      replayed: e.direction === "in" && e.replayed,
    })),
  };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderConsoleHtml(view: ConsoleView): string {
  const parts: string[] = [
    `<div class="console-modal${view.open ? " open" : ""}" role="dialog">`,
    '<div class="console-log">',
  ];
  for (const line of view.lines) {
    const cls = line.direction === "in"
      ? `in${line.replayed ? " replayed" : ""}` : "out";
    parts.push(`<div class="line ${cls}">${esc(line.text)}` +
      `${line.replayed ? ' <span class="note">(replayed)</span>' : ""}</div>`);
  }
  parts.push("</div>");
  if (view.open) {
    parts.push(
      `<div class="prompt">waiting for <b>${esc(view.promptKind ?? "input")}</b>` +
      (view.rejectedMessage ? ` <span class="rejected">${esc(view.rejectedMessage)}</span>` : "") +
      '</div><input class="console-input" autofocus />',
    );
  }
  parts.push("</div>");
  return parts.join("");
}

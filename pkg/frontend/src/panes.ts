/** Register, memory, reference and stats panes: verbatim payload rendering. */

import type {
  CatalogResponse, DiagnosticJson, MemoryResponse, StatePayload,
} from "./types.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderRegistersHtml(payload: StatePayload): string {
  const parts = ['<table class="registers"><thead><tr><th>reg</th><th>abi</th>',
    "<th>value</th></tr></thead><tbody>"];
  parts.push(`<tr><td>pc</td><td></td><td class="hex">${payload.registers.pc}</td></tr>`);
  for (const reg of payload.registers.x) {
    parts.push(`<tr><td>${reg.name}</td><td>${reg.abi}</td>` +
      `<td class="hex">${reg.value}</td></tr>`);
  }
  parts.push("</tbody></table>");
  return parts.join("");
}

export function renderStatsHtml(payload: StatePayload): string {
  const s = payload.stats;
  const cpi = s.cpi === null ? "-" : s.cpi.toFixed(3);
  const status = payload.status + (payload.reason ? ` (${payload.reason})` : "");
  const fault = payload.fault ? ` <span class="fault">${esc(payload.fault.message)}</span>` : "";
  return `<div class="stats">cycle <b>${payload.cycle}</b> | status <b>${esc(status)}</b>${fault}` +
    ` | retired ${s.retired} | stalls ${s.raw_stalls + s.load_use_stalls}` +
    ` (raw ${s.raw_stalls}, load-use ${s.load_use_stalls})` +
    ` | flushes ${s.flushes} | CPI ${cpi}</div>`;
}

export function renderMemoryHtml(window: MemoryResponse, perRow = 8): string {
  const parts = [`<div class="memory" data-segment="${window.segment}">`];
  if (window.text_rows) {
    parts.push('<table class="mem-text"><tbody>');
    for (const row of window.text_rows) {
      parts.push(`<tr><td class="hex">${row.addr}</td><td class="hex">${row.word}</td>` +
        `<td>${esc(row.disasm)}</td><td>${row.source_line ?? ""}</td></tr>`);
    }
    parts.push("</tbody></table>");
  } else {
    parts.push('<table class="mem-bytes"><tbody>');
    for (let i = 0; i < window.bytes.length; i += perRow) {
      const chunk = window.bytes.slice(i, i + perRow);
      const hex = chunk.map((b) => b.value.toString(16).padStart(2, "0")).join(" ");
      const text = chunk.map((b) =>
        b.value >= 32 && b.value < 127 ? String.fromCharCode(b.value) : ".").join("");
      parts.push(`<tr><td class="hex">${chunk[0]!.addr}</td>` +
        `<td class="hex">${hex}</td><td class="ascii">${esc(text)}</td></tr>`);
    }
    parts.push("</tbody></table>");
  }
  parts.push("</div>");
  return parts.join("");
}

export function renderReferenceHtml(catalog: CatalogResponse): string {
  const parts = ['<div class="reference"><h3>Instructions</h3><table><tbody>'];
  for (const ins of catalog.instructions) {
    parts.push(`<tr><td class="mono">${esc(ins.syntax)}</td>` +
      `<td>${esc(ins.description)}</td></tr>`);
  }
  parts.push("</tbody></table><h3>Directives</h3><table><tbody>");
  for (const d of catalog.directives) {
    parts.push(`<tr><td class="mono">${esc(d.name)}</td><td>${esc(d.description)}</td></tr>`);
  }
  parts.push("</tbody></table></div>");
  return parts.join("");
}

export interface EditorMarker {
  line: number;
  column: number;
  severity: string;
  message: string;
}

export function diagnosticsToMarkers(diagnostics: DiagnosticJson[]): EditorMarker[] {
  return diagnostics.map((d) => ({
    line: d.line, column: d.column, severity: d.severity, message: d.message,
  }));
}

export function renderDiagnosticsHtml(diagnostics: DiagnosticJson[]): string {
  if (diagnostics.length === 0) return "";
  const parts = ['<ul class="diagnostics">'];
  for (const d of diagnostics) {
    parts.push(`<li class="${d.severity}" data-line="${d.line}" data-column="${d.column}">` +
      `${d.line}:${d.column}: ${d.severity}: ${esc(d.message)}</li>`);
  }
  parts.push("</ul>");
  return parts.join("");
}

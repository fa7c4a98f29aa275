/** Instructions-by-cycles diagram view, rendered cell-for-cell from the
 * service's diagram JSON.  parseDiagramCsv exists so tests (and curious
 * users) can check the HTML grid against the CSV render byte for byte. */

import type { DiagramJson } from "./types.js";

export const BUBBLE_DISPLAY = "◦";

export interface DiagramTable {
  mode: "full" | "squashed";
  header: string[]; // cycle numbers as strings
  rows: {
    label: string;
    flushed: boolean;
    cells: string[]; // canonical cell codes (BUB kept canonical)
    blockNote: string | null; // annotation shown before this row
  }[];
}

export function buildDiagramTable(diagram: DiagramJson): DiagramTable {
  const notes = new Map<number, string>();
  for (const block of diagram.blocks) {
    notes.set(
      block.first_row,
      `next ${block.row_count} row(s) repeat ×${block.repeat}, ` +
      `one iteration every ${block.period} cycles`,
    );
  }
  return {
    mode: diagram.mode,
    header: Array.from({ length: diagram.cycles }, (_, i) => String(i + 1)),
    rows: diagram.rows.map((row, index) => ({
      label: row.label,
      flushed: row.flushed,
      cells: [...row.cells],
      blockNote: notes.get(index) ?? null,
    })),
  };
}

export function cellDisplay(cell: string): string {
  return cell === "BUB" ? BUBBLE_DISPLAY : cell;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderDiagramHtml(table: DiagramTable): string {
  const parts: string[] = ['<table class="diagram">', "<thead><tr><th>instr</th>"];
  for (const h of table.header) parts.push(`<th>${h}</th>`);
  parts.push("</tr></thead><tbody>");
  for (const row of table.rows) {
    if (row.blockNote) {
      parts.push(
        `<tr class="block-note"><td colspan="${table.header.length + 1}">` +
        `${esc(row.blockNote)}</td></tr>`,
      );
    }
    parts.push(`<tr class="${row.flushed ? "flushed" : ""}"><td class="label">` +
      `${esc(row.label)}</td>`);
    for (const cell of row.cells) {
      const kind = cell === "" ? "empty"
        : cell === "FL" ? "flush"
        : cell === "BUB" ? "bubble"
        : cell.endsWith("*") ? "held" : "stage";
      parts.push(`<td class="cell ${kind}">${esc(cellDisplay(cell))}</td>`);
    }
    parts.push("</tr>");
  }
  parts.push("</tbody></table>");
  return parts.join("");
}

/** Minimal CSV reader for the service's diagram CSV (quotes per RFC 4180). */
function splitCsvLine(line: string): string[] {
  const out: string[] = [];
  let cur = "";
  let quoted = false;
  for (let i = 0; i < line.length; i += 1) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          cur += '"';
          i += 1;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      out.push(cur);
      cur = "";
    } else {
      cur += ch;
    }
  }
  out.push(cur);
  return out;
}

export interface ParsedCsvDiagram {
  mode: string;
  header: string[];
  rows: { label: string; cells: string[] }[];
  blocks: { first_row: number; row_count: number; repeat: number; period: number }[];
}

export function parseDiagramCsv(csv: string): ParsedCsvDiagram {
  const lines = csv.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) throw new Error("empty diagram CSV");
  const header = splitCsvLine(lines[0]!).slice(1);
  const rows: ParsedCsvDiagram["rows"] = [];
  const blocks: ParsedCsvDiagram["blocks"] = [];
  let mode = "full";
  for (const line of lines.slice(1)) {
    const cells = splitCsvLine(line);
    const first = cells[0] ?? "";
    if (first === "#mode") {
      mode = cells[1] ?? "full";
    } else if (first === "#block") {
      blocks.push({
        first_row: Number(cells[1]),
        row_count: Number(cells[2]),
        repeat: Number(cells[3]),
        period: Number(cells[4]),
      });
    } else {
      rows.push({
        label: first,
        cells: cells.slice(1).map((c) => (c === "o" ? "BUB" : c)),
      });
    }
  }
  return { mode, header, rows, blocks };
}

/** Datapath schematic: a fixed book-style layout drawn from one payload.
 *
 * Everything shown (labels, tooltip lines, active paths, stage tags, bubble
 * marks) is lifted verbatim from payload fields; no simulation logic lives
 * here.  The component set itself selects the forwarding/no-forwarding
 * variant: a component absent from the payload is not drawn.
 */

import type { ComponentJson, StageName, StatePayload, Tag } from "./types.js";

export interface DrawnComponent {
  id: string;
  label: string;
  stage: string;
  tooltip: string;
  active: boolean;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface StageTagView {
  stage: StageName;
  occupant: Tag | null;
  bubble: boolean;
  colorClass: string;
  text: string;
}

export interface ForwardPathView {
  operand: "a" | "b";
  source: "ex_mem" | "mem_wb";
  active: boolean;
}

export interface SchematicModel {
  components: DrawnComponent[];
  stageTags: StageTagView[];
  forwardPaths: ForwardPathView[];
  flushedSeqs: number[];
}

// fixed layout: x bands per stage, latches on the seams
const LAYOUT: Record<string, { x: number; y: number; w: number; h: number }> = {
  pc: { x: 10, y: 150, w: 60, h: 60 },
  instr_mem: { x: 90, y: 130, w: 110, h: 100 },
  if_id: { x: 220, y: 60, w: 34, h: 300 },
  reg_file: { x: 300, y: 120, w: 130, h: 110 },
  imm_gen: { x: 300, y: 260, w: 130, h: 50 },
  control: { x: 300, y: 30, w: 130, h: 50 },
  hazard_unit: { x: 300, y: 330, w: 130, h: 50 },
  id_ex: { x: 460, y: 60, w: 34, h: 300 },
  alu: { x: 540, y: 130, w: 120, h: 100 },
  branch_adder: { x: 540, y: 40, w: 120, h: 55 },
  fwd_unit: { x: 540, y: 300, w: 120, h: 55 },
  ex_mem: { x: 690, y: 60, w: 34, h: 300 },
  data_mem: { x: 770, y: 130, w: 120, h: 100 },
  mem_wb: { x: 920, y: 60, w: 34, h: 300 },
  wb_mux: { x: 1000, y: 140, w: 80, h: 80 },
};

const STAGES: StageName[] = ["IF", "ID", "EX", "MEM", "WB"];

export function signalLines(component: ComponentJson): string[] {
  return Object.entries(component.signals).map(
    ([name, value]) => `${name} = ${value}`,
  );
}

export function tooltipFor(component: ComponentJson): string {
  return [component.label, component.description, ...signalLines(component)].join("\n");
}

function isActive(component: ComponentJson): boolean {
  const s = component.signals;
  if (typeof s["active"] === "boolean") return s["active"];
  if (typeof s["occupied"] === "boolean") return s["occupied"];
  if (typeof s["write_enable"] === "boolean") return s["write_enable"];
  return true;
}

export function buildSchematic(payload: StatePayload): SchematicModel {
  const components: DrawnComponent[] = [];
  for (const comp of payload.snapshot.components) {
    const pos = LAYOUT[comp.id];
    if (!pos) continue; // unknown component: never invent a drawing for it
    components.push({
      id: comp.id,
      label: comp.label,
      stage: comp.stage,
      tooltip: tooltipFor(comp),
      active: isActive(comp),
      ...pos,
    });
  }
  const stageTags: StageTagView[] = STAGES.map((stage) => {
    const occupant = payload.snapshot.stages[stage];
    return {
      stage,
      occupant,
      bubble: occupant === null,
      colorClass: occupant === null ? "bubble" : `tag-color-${occupant.color}`,
      text: occupant === null ? "bubble" : `${occupant.addr}: ${occupant.disasm}`,
    };
  });
  const forwardPaths: ForwardPathView[] = [];
  if (payload.snapshot.components.some((c) => c.id === "fwd_unit")) {
    for (const operand of ["a", "b"] as const) {
      for (const source of ["ex_mem", "mem_wb"] as const) {
        forwardPaths.push({
          operand,
          source,
          active: payload.snapshot.forwards.some(
            (f) => f.operand === operand && f.source === source,
          ),
        });
      }
    }
  }
  return {
    components,
    stageTags,
    forwardPaths,
    flushedSeqs: payload.snapshot.flushed.map((t) => t.seq),
  };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render to an SVG string; tooltips ride on <title> children. */
export function renderSchematicSvg(model: SchematicModel): string {
  const parts: string[] = [
    '<svg viewBox="0 0 1100 400" xmlns="http://www.w3.org/2000/svg" class="schematic">',
  ];
  const pathTargets = { a: 165, b: 195 } as const;
  for (const path of model.forwardPaths) {
    const fromX = path.source === "ex_mem" ? 707 : 937;
    const y = pathTargets[path.operand];
    parts.push(
      `<path class="fwd-path${path.active ? " active" : ""}" ` +
      `data-path="${path.source}-${path.operand}" ` +
      `d="M ${fromX} 330 V 370 H 520 V ${y} H 540" fill="none"/>`,
    );
  }
  for (const c of model.components) {
    parts.push(
      `<g class="component${c.active ? " active" : ""}" data-id="${c.id}">` +
      `<rect x="${c.x}" y="${c.y}" width="${c.w}" height="${c.h}" rx="6"/>` +
      `<text x="${c.x + c.w / 2}" y="${c.y + 16}" text-anchor="middle">${esc(c.label)}</text>` +
      `<title>${esc(c.tooltip)}</title></g>`,
    );
  }
  model.stageTags.forEach((tag, i) => {
    const x = 30 + i * 215;
    parts.push(
      `<g class="stage-tag ${tag.colorClass}" data-stage="${tag.stage}">` +
      `<rect x="${x}" y="0" width="205" height="22" rx="4"/>` +
      `<text x="${x + 6}" y="15">${tag.stage}: ${esc(tag.text)}</text></g>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

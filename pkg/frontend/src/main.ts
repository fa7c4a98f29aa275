/** Browser bootstrap: wires the pure views to the DOM and the service. */

import { ApiClient } from "./api.js";
import { SessionController } from "./controls.js";
import { buildConsoleView, renderConsoleHtml } from "./console.js";
import { buildDiagramTable, renderDiagramHtml } from "./diagram.js";
import { buildSchematic, renderSchematicSvg } from "./schematic.js";
import {
  renderDiagnosticsHtml, renderMemoryHtml, renderReferenceHtml,
  renderRegistersHtml, renderStatsHtml,
} from "./panes.js";
import type { StatePayload } from "./types.js";

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

const client = new ApiClient("");
let diagramMode: "full" | "squashed" = "full";
let memorySegment = "text";

const controller = new SessionController(client, {
  onState: (payload) => void render(payload),
  onDiagnostics: (diagnostics) => {
    $("#diagnostics").innerHTML = renderDiagnosticsHtml(diagnostics);
  },
  onError: (message) => {
    const banner = $("#error-banner");
    banner.textContent = message;
    banner.classList.add("visible");
    setTimeout(() => banner.classList.remove("visible"), 4000);
  },
  confirmReset: () => window.confirm("Toggling forwarding resets execution. Continue?"),
});

async function render(payload: StatePayload): Promise<void> {
  $("#schematic-host").innerHTML = renderSchematicSvg(buildSchematic(payload));
  $("#registers-host").innerHTML = renderRegistersHtml(payload);
  $("#stats-host").innerHTML = renderStatsHtml(payload);
  $("#console-host").innerHTML = renderConsoleHtml(buildConsoleView(payload));
  const input = document.querySelector<HTMLInputElement>(".console-input");
  if (input) {
    input.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter") void controller.postInput(input.value);
    });
    input.focus();
  }
  const id = controller.id;
  if (id !== null) {
    try {
      const [diagram, memory] = await Promise.all([
        client.diagram(id, diagramMode),
        client.memory(id, memorySegment, undefined, 256),
      ]);
      $("#diagram-host").innerHTML = renderDiagramHtml(buildDiagramTable(diagram.diagram));
      $("#memory-host").innerHTML = renderMemoryHtml(memory);
    } catch {
      // read-only panels refresh on the next action
    }
  }
}

async function boot(): Promise<void> {
  const editor = $("#editor") as unknown as HTMLTextAreaElement;
  const examples = await client.examples();
  const picker = $("#example-picker") as unknown as HTMLSelectElement;
  for (const example of examples.examples) {
    const option = document.createElement("option");
    option.value = example.name;
    option.textContent = `${example.name} - ${example.title}`;
    picker.appendChild(option);
  }
  picker.addEventListener("change", () => {
    const chosen = examples.examples.find((e) => e.name === picker.value);
    if (chosen) {
      editor.value = chosen.source;
      void controller.assemble(editor.value);
    }
  });
  $("#btn-assemble").addEventListener("click", () => void controller.assemble(editor.value));
  $("#btn-step").addEventListener("click", () => void controller.step(1));
  $("#btn-step5").addEventListener("click", () => void controller.step(5));
  $("#btn-back").addEventListener("click", () => void controller.back(1));
  $("#btn-run").addEventListener("click", () => void controller.step(10000));
  $("#btn-reset").addEventListener("click", () => void controller.reset());
  $("#btn-forwarding").addEventListener("click", () => void controller.toggleForwarding());
  $("#diagram-mode").addEventListener("change", (ev) => {
    diagramMode = (ev.target as HTMLSelectElement).value as "full" | "squashed";
    const payload = controller.payload;
    if (payload) void render(payload);
  });
  $("#memory-segment").addEventListener("change", (ev) => {
    memorySegment = (ev.target as HTMLSelectElement).value;
    const payload = controller.payload;
    if (payload) void render(payload);
  });
  const reference = await client.catalog();
  $("#reference-host").innerHTML = renderReferenceHtml(reference);
  const first = examples.examples[0];
  if (first) {
    editor.value = first.source;
    void controller.assemble(editor.value);
  }
}

void boot();

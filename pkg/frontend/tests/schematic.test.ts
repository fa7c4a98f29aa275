import { describe, expect, it } from "vitest";

import { buildSchematic, renderSchematicSvg, tooltipFor } from "../src/schematic.js";
import { statePayload } from "./fixtures.js";

describe("schematic contract", () => {
  it("draws the forwarding unit exactly when the payload carries it", () => {
    const withFwd = buildSchematic(statePayload("state_cycle0_fwd"));
    const withoutFwd = buildSchematic(statePayload("state_cycle0_nofwd"));
    expect(withFwd.components.map((c) => c.id)).toContain("fwd_unit");
    expect(withoutFwd.components.map((c) => c.id)).not.toContain("fwd_unit");
    expect(renderSchematicSvg(withFwd)).toContain('data-id="fwd_unit"');
    expect(renderSchematicSvg(withoutFwd)).not.toContain('data-id="fwd_unit"');
  });

  it("draws every component the payload lists, and nothing else", () => {
    const payload = statePayload("state_midrun");
    const model = buildSchematic(payload);
    expect(model.components.map((c) => c.id)).toEqual(
      payload.snapshot.components.map((c) => c.id),
    );
  });

  it("tooltips carry the payload's signal values verbatim", () => {
    const payload = statePayload("state_midrun");
    for (const component of payload.snapshot.components) {
      const tooltip = tooltipFor(component);
      expect(tooltip).toContain(component.label);
      expect(tooltip).toContain(component.description);
      for (const [name, value] of Object.entries(component.signals)) {
        expect(tooltip).toContain(`${name} = ${value}`);
      }
    }
    const svg = renderSchematicSvg(buildSchematic(payload));
    const alu = payload.snapshot.components.find((c) => c.id === "alu")!;
    expect(svg).toContain(`result = ${alu.signals["result"]}`);
  });

  it("highlights exactly the active forwarding paths", () => {
    const payload = statePayload("state_midrun");
    const model = buildSchematic(payload);
    const active = model.forwardPaths.filter((p) => p.active)
      .map((p) => `${p.source}-${p.operand}`).sort();
    const expected = payload.snapshot.forwards
      .map((f) => `${f.source}-${f.operand}`).sort();
    expect(active).toEqual(expected);
    const svg = renderSchematicSvg(model);
    for (const key of expected) {
      expect(svg).toMatch(new RegExp(`class="fwd-path active" data-path="${key}"`));
    }
  });

  it("marks empty stages as bubbles and tags occupants with their colors", () => {
    const idle = buildSchematic(statePayload("state_cycle0_fwd"));
    expect(idle.stageTags.every((t) => t.bubble)).toBe(true);
    expect(renderSchematicSvg(idle)).toContain("bubble");

    const busy = buildSchematic(statePayload("state_midrun"));
    const payload = statePayload("state_midrun");
    for (const tag of busy.stageTags) {
      const occupant = payload.snapshot.stages[tag.stage];
      if (occupant === null) {
        expect(tag.bubble).toBe(true);
      } else {
        expect(tag.colorClass).toBe(`tag-color-${occupant.color}`);
        expect(tag.text).toContain(occupant.disasm);
        expect(tag.text).toContain(occupant.addr);
      }
    }
  });

  it("shows occupied latches as active and empty ones as inactive", () => {
    const payload = statePayload("state_midrun");
    const model = buildSchematic(payload);
    const byId = new Map(model.components.map((c) => [c.id, c]));
    for (const comp of payload.snapshot.components) {
      const signals = comp.signals;
      if (typeof signals["occupied"] === "boolean") {
        expect(byId.get(comp.id)!.active).toBe(signals["occupied"]);
      }
    }
  });
});

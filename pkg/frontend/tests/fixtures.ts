import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import type { DiagramResponse, StatePayload } from "../src/types.js";

export function loadFixture<T>(name: string): T {
  const path = fileURLToPath(new URL(`../fixtures/${name}.json`, import.meta.url));
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export const statePayload = (name: string): StatePayload => loadFixture<StatePayload>(name);
export const diagramResponse = (name: string): DiagramResponse =>
  loadFixture<DiagramResponse>(name);

/** Wire types for the session service. 64-bit values travel as 0x-hex strings. */

export interface Tag {
  seq: number;
  addr: string;
  disasm: string;
  line: number | null;
  color: number;
}

export type StageName = "IF" | "ID" | "EX" | "MEM" | "WB";

export interface ForwardUse {
  operand: "a" | "b";
  source: "ex_mem" | "mem_wb";
}

export interface HazardEventJson {
  cycle: number;
  kind: string;
  stage: string;
  consumer: Tag | null;
  producer: Tag | null;
  registers: number[];
}

export interface ComponentJson {
  id: string;
  label: string;
  stage: string;
  description: string;
  signals: Record<string, string | boolean>;
}

export interface SnapshotJson {
  cycle: number;
  stages: Record<StageName, Tag | null>;
  flushed: Tag[];
  forwards: ForwardUse[];
  events: HazardEventJson[];
  components: ComponentJson[];
}

export interface RegisterJson {
  index: number;
  name: string;
  abi: string;
  value: string;
}

export interface TranscriptEventJson {
  direction: "out" | "in";
  text: string;
  cycle: number;
  replayed: boolean;
}

export interface PendingPromptJson {
  kind: string;
  cycle: number;
}

export interface StatsJson {
  cycles: number;
  retired: number;
  raw_stalls: number;
  load_use_stalls: number;
  flushes: number;
  flush_bubbles: number;
  cpi: number | null;
}

export interface DiagnosticJson {
  line: number;
  column: number;
  severity: "error" | "warning";
  message: string;
  snippet: string;
}

export interface StatePayload {
  id: string;
  cycle: number;
  status: "running" | "awaiting_input" | "halted" | "faulted";
  reason: string | null;
  exit_code: number | null;
  fault: { kind: string; message: string; stage: string } | null;
  at_start: boolean;
  at_frontier: boolean;
  options: { forwarding: boolean; max_cycles: number };
  snapshot: SnapshotJson;
  registers: { pc: string; x: RegisterJson[] };
  transcript: { events: TranscriptEventJson[]; pending_prompt: PendingPromptJson | null };
  stats: StatsJson;
  diagnostics?: DiagnosticJson[];
  input_rejected?: { text: string; kind: string; message: string };
}

export interface DiagramRowJson {
  seq: number;
  addr: string;
  disasm: string;
  source_line: number | null;
  flushed: boolean;
  label: string;
  cells: string[];
}

export interface DiagramBlockJson {
  first_row: number;
  row_count: number;
  repeat: number;
  period: number;
}

export interface DiagramJson {
  mode: "full" | "squashed";
  cycles: number;
  rows: DiagramRowJson[];
  blocks: DiagramBlockJson[];
}

export interface DiagramResponse {
  diagram: DiagramJson;
  csv: string;
}

export interface MemoryResponse {
  segment: string;
  start: string;
  extent: { lo: string; hi: string };
  bytes: { addr: string; value: number }[];
  text_rows: { addr: string; word: string; disasm: string; source_line: number | null }[] | null;
}

export interface CatalogResponse {
  instructions: { mnemonic: string; format: string; syntax: string; description: string }[];
  directives: { name: string; description: string }[];
}

export interface ExamplesResponse {
  examples: { name: string; title: string; source: string }[];
}

export interface ServiceErrorBody {
  error: { code: string; message: string; diagnostics?: DiagnosticJson[] };
}

/** HTTP client for the session service, with strict mutation serialization.
 *
 * The UI must never have two mutating requests for one session in flight at
 * once; MutationGate queues them so rapid clicking degrades to an ordered
 * sequence of requests, each starting only after the previous response.
 */

import type {
  CatalogResponse, DiagramResponse, ExamplesResponse, MemoryResponse,
  ServiceErrorBody, StatePayload,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly body: ServiceErrorBody["error"] | null = null,
  ) {
    super(message);
  }
}

export class MutationGate {
  private chain: Promise<unknown> = Promise.resolve();
  private pending = 0;
  private active = 0;

  /** Queue one mutating operation; resolves with the operation's result. */
  run<T>(op: () => Promise<T>): Promise<T> {
    this.pending += 1;
    const next = this.chain.then(async () => {
      this.active += 1;
      try {
        return await op();
      } finally {
        this.active -= 1;
        this.pending -= 1;
      }
    });
    // failures release the queue; the caller still sees the rejection
    this.chain = next.then(() => undefined, () => undefined);
    return next;
  }

  get inFlight(): number {
    return this.active;
  }

  get queued(): number {
    return this.pending;
  }
}

export class ApiClient {
  readonly gate = new MutationGate();

  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchImpl(this.base + path, init);
    const data = (await resp.json()) as T & Partial<ServiceErrorBody>;
    if (!resp.ok) {
      const err = (data as ServiceErrorBody).error;
      throw new ApiError(resp.status, err?.code ?? "unknown",
        err?.message ?? `HTTP ${resp.status}`, err ?? null);
    }
    return data as T;
  }

  private mutate<T>(method: string, path: string, body?: unknown): Promise<T> {
    return this.gate.run(() => this.request<T>(method, path, body));
  }

  createSession(source: string, options?: { forwarding?: boolean; max_cycles?: number }):
      Promise<StatePayload> {
    return this.mutate("POST", "/sessions", { source, options });
  }

  step(id: string, n = 1): Promise<StatePayload> {
    return this.mutate("POST", `/sessions/${id}/step`, { n });
  }

  back(id: string, n = 1): Promise<StatePayload> {
    return this.mutate("POST", `/sessions/${id}/back`, { n });
  }

  postInput(id: string, text: string): Promise<StatePayload> {
    return this.mutate("POST", `/sessions/${id}/input`, { text });
  }

  reset(id: string, options?: { forwarding?: boolean; max_cycles?: number }):
      Promise<StatePayload> {
    return this.mutate("POST", `/sessions/${id}/reset`, options ? { options } : {});
  }

  state(id: string): Promise<StatePayload> {
    return this.request("GET", `/sessions/${id}/state`);
  }

  memory(id: string, segment: string, addr?: string, len = 256): Promise<MemoryResponse> {
    const a = addr ? `&addr=${encodeURIComponent(addr)}` : "";
    return this.request("GET", `/sessions/${id}/memory?segment=${segment}${a}&len=${len}`);
  }

  diagram(id: string, mode: "full" | "squashed"): Promise<DiagramResponse> {
    return this.request("GET", `/sessions/${id}/diagram?mode=${mode}`);
  }

  examples(): Promise<ExamplesResponse> {
    return this.request("GET", "/examples");
  }

  catalog(): Promise<CatalogResponse> {
    return this.request("GET", "/catalog");
  }
}

/** Session controller: one service call per user action, UI state fan-out.
 *
 * Mutations flow through the ApiClient's gate, so even frantic clicking
 * yields one-at-a-time requests.  Toggling forwarding resets execution (the
 * datapath changes), so it asks for confirmation first.
 */

import { ApiClient, ApiError } from "./api.js";
import type { DiagnosticJson, StatePayload } from "./types.js";

export interface ControllerEvents {
  onState: (payload: StatePayload) => void;
  onDiagnostics: (diagnostics: DiagnosticJson[]) => void;
  onError: (message: string) => void;
  /** must return true to proceed with a forwarding toggle (it resets) */
  confirmReset: () => boolean;
}

export class SessionController {
  private sessionId: string | null = null;
  private forwarding = true;
  private lastPayload: StatePayload | null = null;

  constructor(private readonly client: ApiClient,
              private readonly events: ControllerEvents) {}

  get id(): string | null {
    return this.sessionId;
  }

  get payload(): StatePayload | null {
    return this.lastPayload;
  }

  private accept(payload: StatePayload): StatePayload {
    this.sessionId = payload.id;
    this.forwarding = payload.options.forwarding;
    this.lastPayload = payload;
    this.events.onState(payload);
    return payload;
  }

  private fail(err: unknown): null {
    if (err instanceof ApiError) {
      if (err.code === "assembly_failed" && err.body?.diagnostics) {
        this.events.onDiagnostics(err.body.diagnostics);
        return null;
      }
      if (err.code === "unknown_session") {
        this.events.onError("session expired; assemble again to reconnect");
        this.sessionId = null;
        return null;
      }
      this.events.onError(err.message);
      return null;
    }
    this.events.onError(String(err));
    return null;
  }

  async assemble(source: string): Promise<StatePayload | null> {
    try {
      const payload = await this.client.createSession(source, {
        forwarding: this.forwarding,
      });
      this.events.onDiagnostics(payload.diagnostics ?? []);
      return this.accept(payload);
    } catch (err) {
      return this.fail(err);
    }
  }

  private requireSession(): string | null {
    if (this.sessionId === null) {
      this.events.onError("assemble a program first");
      return null;
    }
    return this.sessionId;
  }

  async step(n = 1): Promise<StatePayload | null> {
    const id = this.requireSession();
    if (id === null) return null;
    try {
      return this.accept(await this.client.step(id, n));
    } catch (err) {
      return this.fail(err);
    }
  }

  async back(n = 1): Promise<StatePayload | null> {
    const id = this.requireSession();
    if (id === null) return null;
    try {
      return this.accept(await this.client.back(id, n));
    } catch (err) {
      return this.fail(err);
    }
  }

  async postInput(text: string): Promise<StatePayload | null> {
    const id = this.requireSession();
    if (id === null) return null;
    try {
      return this.accept(await this.client.postInput(id, text));
    } catch (err) {
      return this.fail(err);
    }
  }

  async reset(): Promise<StatePayload | null> {
    const id = this.requireSession();
    if (id === null) return null;
    try {
      return this.accept(await this.client.reset(id));
    } catch (err) {
      return this.fail(err);
    }
  }

  /** Forwarding toggle implies reset; asks confirmReset before acting. */
  async toggleForwarding(): Promise<StatePayload | null> {
    const id = this.requireSession();
    if (id === null) return null;
    if (!this.events.confirmReset()) return this.lastPayload;
    try {
      return this.accept(await this.client.reset(id, {
        forwarding: !this.forwarding,
      }));
    } catch (err) {
      return this.fail(err);
    }
  }
}

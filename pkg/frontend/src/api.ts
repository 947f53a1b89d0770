/** Typed client for the supervisor API; every call maps 1:1 to an endpoint. */

import { SseParser } from "./sse.js";
import { parseSnapshot } from "./types.js";
import type { CommandResponse, TelemetrySnapshot, VerifyResponse } from "./types.js";

export interface CommandResult {
  /** 200 ack or in-band refusal, 403 bad token, 409 illegal transition. */
  status: number;
  body: CommandResponse;
}

export class SupervisorClient {
  constructor(
    readonly baseUrl: string,
    readonly token: string,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private headers(): Record<string, string> {
    return { "X-Supervisor-Token": this.token };
  }

  private async command(path: string, body?: Record<string, number>): Promise<CommandResult> {
    const response = await fetch(this.url(path), {
      method: "POST",
      headers: { ...this.headers(), "Content-Type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
    return { status: response.status, body: (await response.json()) as CommandResponse };
  }

  pause(): Promise<CommandResult> {
    return this.command("/pause");
  }

  resume(): Promise<CommandResult> {
    return this.command("/resume");
  }

  kill(): Promise<CommandResult> {
    return this.command("/kill");
  }

  budget(delta: Record<string, number>): Promise<CommandResult> {
    return this.command("/budget", delta);
  }

  async verify(): Promise<VerifyResponse> {
    const response = await fetch(this.url("/verify"), { headers: this.headers() });
    if (!response.ok) {
      throw new Error(`verify failed with status ${response.status}`);
    }
    return (await response.json()) as VerifyResponse;
  }

  async audit(from?: number): Promise<string> {
    const suffix = from === undefined ? "" : `?from=${from}`;
    const response = await fetch(this.url(`/audit${suffix}`), { headers: this.headers() });
    if (!response.ok) {
      throw new Error(`audit fetch failed with status ${response.status}`);
    }
    return response.text();
  }

  /** Stream snapshots until the server closes or the signal aborts. */
  async *telemetry(since?: number, signal?: AbortSignal): AsyncGenerator<TelemetrySnapshot> {
    const suffix = since === undefined ? "" : `?since=${since}`;
    const response = await fetch(this.url(`/telemetry${suffix}`), {
      headers: this.headers(),
      signal: signal ?? null,
    });
    if (!response.ok || response.body === null) {
      throw new Error(`telemetry stream failed with status ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) {
          return;
        }
        for (const payload of parser.feed(decoder.decode(value, { stream: true }))) {
          yield parseSnapshot(JSON.parse(payload));
        }
      }
    } finally {
      await reader.cancel().catch(() => undefined);
    }
  }
}

// Thin fetch client for the editing service.

import type { InstructionResponse, LayoutDoc, SessionResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: string
  ) {
    super(`HTTP ${status}: ${body}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch
  ) {}

  async createSessionFromPrompt(prompt: string): Promise<SessionResponse> {
    return this.json(
      await this.fetchFn(`${this.baseUrl}/v1/sessions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ prompt }),
      })
    );
  }

  async createSessionFromLayout(layout: LayoutDoc): Promise<SessionResponse> {
    return this.json(
      await this.fetchFn(`${this.baseUrl}/v1/sessions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ layout }),
      })
    );
  }

  async getSession(sessionId: string): Promise<{ layout: LayoutDoc }> {
    return this.json(await this.fetchFn(`${this.baseUrl}/v1/sessions/${sessionId}`));
  }

  /** Submit the instruction body EXACTLY as serialized by the
   * instruction box; the bytes are a cross-component contract. */
  async applyInstruction(sessionId: string, body: string): Promise<InstructionResponse> {
    return this.json(
      await this.fetchFn(`${this.baseUrl}/v1/sessions/${sessionId}/instructions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body,
      })
    );
  }

  async undo(sessionId: string): Promise<{ layout: LayoutDoc }> {
    return this.json(
      await this.fetchFn(`${this.baseUrl}/v1/sessions/${sessionId}/undo`, { method: "POST" })
    );
  }

  async renderSvg(sessionId: string, backend = "mock"): Promise<string> {
    const response = await this.fetchFn(
      `${this.baseUrl}/v1/sessions/${sessionId}/render?backend=${backend}`
    );
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.text();
  }

  private async json<T>(response: Response): Promise<T> {
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }
}

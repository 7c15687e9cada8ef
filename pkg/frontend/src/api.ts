/**
 * Typed client for the rating-experiment HTTP service.
 *
 * Endpoints: POST /sessions, GET /sessions/{id}/trial,
 * POST /sessions/{id}/ratings, GET /export.csv. The panel's
 * "something_else" category travels as "other" on the wire.
 */

import type { SliderPanelState } from "./slider.js";

export interface SessionInfo {
  session_id: string;
  observer: string;
  session: number;
  total: number;
}

export interface Trial {
  completed: boolean;
  stimulus_id?: string;
  image_url?: string;
  index?: number;
  total?: number;
}

export interface SubmitResult {
  accepted: boolean;
  recorded: number;
  total: number;
}

/** Service-side rejection (validation, conflicts); carries the HTTP status. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ExperimentClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as T & { error?: string };
    if (!response.ok) {
      throw new ApiError(response.status, payload.error ?? `HTTP ${response.status}`);
    }
    return payload;
  }

  startSession(observer: string, session: number, seed: number): Promise<SessionInfo> {
    return this.request<SessionInfo>("POST", "/sessions", { observer, session, seed });
  }

  currentTrial(sessionId: string): Promise<Trial> {
    return this.request<Trial>("GET", `/sessions/${encodeURIComponent(sessionId)}/trial`);
  }

  submitRatings(
    sessionId: string,
    stimulusId: string,
    panel: SliderPanelState,
  ): Promise<SubmitResult> {
    return this.request<SubmitResult>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/ratings`,
      {
        stimulus_id: stimulusId,
        metal: panel.metal,
        shiny_black: panel.shiny_black,
        shiny_white: panel.shiny_white,
        other: panel.something_else,
      },
    );
  }

  imageUrl(relative: string): string {
    return this.baseUrl + relative;
  }

  exportUrl(): string {
    return `${this.baseUrl}/export.csv`;
  }
}

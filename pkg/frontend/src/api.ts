/** Thin typed client for the design-session HTTP API. */

import type {
  ChangePayload,
  CityDoc,
  RecommendationResponse,
  SessionState,
  WhatIfReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`service error ${status}`);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail: unknown = null;
    try {
      detail = (await response.json()).detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class SessionApi {
  constructor(
    private base: string,
    public sessionId = "",
  ) {}

  async createSession(
    city: CityDoc,
    options: { seed?: number; n_particles?: number; tour_mode?: "closed" | "open" } = {},
  ): Promise<SessionState> {
    const body = { city, seed: 0, n_particles: 128, ...options };
    const created = await parseOrThrow<{ session_id: string; state: SessionState }>(
      await fetch(`${this.base}/sessions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
    this.sessionId = created.session_id;
    return created.state;
  }

  async state(): Promise<SessionState> {
    return parseOrThrow(await fetch(`${this.base}/sessions/${this.sessionId}`));
  }

  async recommendation(): Promise<RecommendationResponse> {
    return parseOrThrow(
      await fetch(`${this.base}/sessions/${this.sessionId}/recommendation`),
    );
  }

  async choose(change: ChangePayload, token?: string): Promise<SessionState> {
    return parseOrThrow(
      await fetch(`${this.base}/sessions/${this.sessionId}/choose`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(token === undefined ? { change } : { change, token }),
      }),
    );
  }

  async whatif(change: string): Promise<WhatIfReport> {
    const params = new URLSearchParams({ change });
    return parseOrThrow(
      await fetch(`${this.base}/sessions/${this.sessionId}/whatif?${params}`),
    );
  }
}

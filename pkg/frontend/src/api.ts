/** Thin client for the three service endpoints the console consumes. */

import type {
  CaseBody,
  FeedbackAck,
  FeedbackBody,
  FeedbackSummary,
  Recommendation,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly stage?: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }

  /** Model endpoints are down; worth retrying. */
  get retryable(): boolean {
    return this.status === 503;
  }
}

async function readError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  let stage: string | undefined;
  try {
    const body = (await response.json()) as { detail?: unknown; stage?: string };
    if (body.detail !== undefined) {
      detail = typeof body.detail === 'string' ? body.detail : JSON.stringify(body.detail);
    }
    stage = body.stage;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail, stage);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw await readError(response);
    }
    return (await response.json()) as T;
  }

  /** Resolve one case. Returns null when the service runs silently (204). */
  async submitCase(body: CaseBody): Promise<Recommendation | null> {
    const response = await this.fetchFn(`${this.baseUrl}/cases`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (response.status === 204) {
      return null;
    }
    if (!response.ok) {
      throw await readError(response);
    }
    return (await response.json()) as Recommendation;
  }

  async submitFeedback(body: FeedbackBody): Promise<FeedbackAck> {
    return this.post<FeedbackAck>('/feedback', body);
  }

  async fetchSummary(): Promise<FeedbackSummary> {
    const response = await this.fetchFn(`${this.baseUrl}/feedback/summary`);
    if (!response.ok) {
      throw await readError(response);
    }
    return (await response.json()) as FeedbackSummary;
  }
}

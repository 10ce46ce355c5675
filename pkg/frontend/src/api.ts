/** Typed client for the session service. All mutations for one session are
 * funneled through a queue so calls never interleave (the server holds a
 * single-writer lock per session; the client respects it too). */

import type {
  ApiErrorBody,
  DirectiveRequest,
  DirectiveResponse,
  InferenceReport,
  PriorAssignment,
  SessionSnapshot,
  SessionStatus,
  TransitionTable,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: ApiErrorBody["code"],
    readonly reason: string,
  ) {
    super(`${code}: ${reason}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let body: Partial<ApiErrorBody> = {};
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    // non-JSON error body; fall through with generic fields
  }
  throw new ApiError(
    response.status,
    body.code ?? "Invalid",
    body.reason ?? response.statusText,
  );
}

export class ApiClient {
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  /** Serialize calls: each request starts only after the previous settles. */
  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task, task);
    this.queue = next.catch(() => undefined);
    return next;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    asText = false,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (asText ? await response.text() : await response.json()) as T;
  }

  createSession(config: Record<string, unknown>): Promise<string> {
    return this.enqueue(async () => {
      const doc = await this.request<{ session_id: string }>("POST", "/sessions", config);
      return doc.session_id;
    });
  }

  snapshot(sessionId: string): Promise<SessionSnapshot> {
    return this.enqueue(() =>
      this.request<SessionSnapshot>("GET", `/sessions/${sessionId}`),
    );
  }

  postDirective(sessionId: string, directive: DirectiveRequest): Promise<DirectiveResponse> {
    return this.enqueue(() =>
      this.request<DirectiveResponse>("POST", `/sessions/${sessionId}/directives`, directive),
    );
  }

  postPriors(
    sessionId: string,
    assignments: PriorAssignment[],
  ): Promise<{ status: SessionStatus }> {
    return this.enqueue(() =>
      this.request<{ status: SessionStatus }>("POST", `/sessions/${sessionId}/priors`, assignments),
    );
  }

  infer(sessionId: string): Promise<InferenceReport> {
    return this.enqueue(async () => {
      const text = await this.request<string>("POST", `/sessions/${sessionId}/infer`, undefined, true);
      return JSON.parse(text) as InferenceReport;
    });
  }

  /** Raw canonical report text, for byte-level comparisons. */
  inferText(sessionId: string): Promise<string> {
    return this.enqueue(() =>
      this.request<string>("POST", `/sessions/${sessionId}/infer`, undefined, true),
    );
  }

  exportText(sessionId: string, kind: string): Promise<string> {
    return this.enqueue(() =>
      this.request<string>(
        "GET",
        `/sessions/${sessionId}/export?kind=${encodeURIComponent(kind)}`,
        undefined,
        true,
      ),
    );
  }

  transitions(): Promise<TransitionTable> {
    return this.enqueue(() => this.request<TransitionTable>("GET", "/transitions"));
  }
}

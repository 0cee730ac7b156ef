import type {
  AnnotatedExport,
  SelectionRange,
  SessionSnapshot,
  SuggestOptions,
  SuggestResponse,
  TaskKind,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly currentVersion?: number,
  ) {
    super(message);
    this.name = 'ApiError';
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

/** Thin client for the session service; all server interaction goes through here. */
export class SessionClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, '');
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) {
      let detail = `${resp.status}`;
      let currentVersion: number | undefined;
      try {
        const body = await resp.json();
        detail = body.detail ?? detail;
        currentVersion = body.current_version;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, resp.status, currentVersion);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  createSession(): Promise<{ session_id: string; version: number }> {
    return this.post('/sessions', {});
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request(`/sessions/${sessionId}`);
  }

  edit(
    sessionId: string,
    sel: SelectionRange,
    text: string,
    baseVersion: number,
  ): Promise<{ version: number }> {
    return this.post(`/sessions/${sessionId}/edit`, {
      start: sel.start,
      end: sel.end,
      text,
      base_version: baseVersion,
    });
  }

  suggest(
    sessionId: string,
    kind: TaskKind,
    sel?: SelectionRange,
    options: SuggestOptions = {},
  ): Promise<SuggestResponse> {
    return this.post(`/sessions/${sessionId}/suggest`, {
      kind,
      start: sel?.start,
      end: sel?.end,
      ...options,
    });
  }

  accept(
    sessionId: string,
    requestId: string,
    candidateIndex: number,
    baseVersion: number,
  ): Promise<{ version: number }> {
    return this.post(`/sessions/${sessionId}/accept`, {
      request_id: requestId,
      candidate_index: candidateIndex,
      base_version: baseVersion,
    });
  }

  exportAnnotated(sessionId: string): Promise<AnnotatedExport> {
    return this.request(`/sessions/${sessionId}/export?format=annotated`);
  }
}

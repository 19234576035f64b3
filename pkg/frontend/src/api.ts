// Typed client for the clarifier gateway JSON API.

export interface SessionCreated {
  session_id: string;
}

export interface OptionOut {
  text: string;
}

export interface ReplyOut {
  kind: 'final' | 'clarify' | 'rejected';
  intent?: string;
  confidence?: number;
  question?: string;
  options?: OptionOut[];
  reason?: string;
}

export interface TranscriptEntry {
  speaker: 'user' | 'system';
  text: string;
}

export interface SessionView {
  session_id: string;
  state: 'awaiting_query' | 'awaiting_clarification' | 'closed';
  transcript: TranscriptEntry[];
  final_intent?: string;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
    this.name = 'GatewayError';
  }
}

export class GatewayClient {
  private readonly fetchFn: FetchLike;

  constructor(private readonly baseUrl: string, fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new GatewayError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request('/v1/health');
  }

  createSession(): Promise<SessionCreated> {
    return this.request('/v1/sessions', { method: 'POST' });
  }

  sendMessage(sessionId: string, text: string): Promise<ReplyOut> {
    return this.request(`/v1/sessions/${sessionId}/messages`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ text }),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/v1/sessions/${sessionId}`);
  }
}

/**
 * Session server client: HTTP calls plus the WebSocket push channel.
 *
 * Order submission is idempotent on the server (first value wins per
 * week), so transient network failures are retried with the identical
 * body; a duplicate acknowledgement is treated as success.
 */

import { OrderAck, parseViewPayload, ViewPayload } from './protocol.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServerError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class StaleTurnError extends ServerError {}

async function throwServerError(response: Response): Promise<never> {
  let code = 'error';
  let message = `server responded ${response.status}`;
  try {
    const body = await response.json();
    const detail = body?.detail ?? body;
    if (detail?.code) code = detail.code;
    if (detail?.message) message = detail.message;
  } catch {
    // keep defaults for non-JSON bodies
  }
  if (code === 'stale_turn') throw new StaleTurnError(response.status, code, message);
  throw new ServerError(response.status, code, message);
}

export interface SessionClientOptions {
  fetchImpl?: FetchLike;
  submitRetries?: number;
}

export class SessionClient {
  readonly baseUrl: string;
  sessionId: string | null;
  playerId: string | null = null;
  private readonly fetchImpl: FetchLike;
  private readonly submitRetries: number;

  constructor(baseUrl: string, sessionId: string | null = null, options: SessionClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.sessionId = sessionId;
    this.fetchImpl = options.fetchImpl ?? ((input, init) => fetch(input, init));
    this.submitRetries = options.submitRetries ?? 2;
  }

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  private requireSession(): string {
    if (this.sessionId === null) throw new Error('no session joined yet');
    return this.sessionId;
  }

  private async post(path: string, body?: unknown): Promise<any> {
    const response = await this.fetchImpl(this.url(path), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: body === undefined ? '{}' : JSON.stringify(body),
    });
    if (!response.ok) await throwServerError(response);
    return response.json();
  }

  async createSession(config: Record<string, unknown> = {}): Promise<string> {
    const body = await this.post('/sessions', { config });
    this.sessionId = body.session_id as string;
    return this.sessionId;
  }

  async join(role: string, playerName: string): Promise<string> {
    const body = await this.post(`/sessions/${this.requireSession()}/join`, {
      role,
      player_name: playerName,
    });
    this.playerId = body.player_id as string;
    return this.playerId;
  }

  async start(auto = false): Promise<void> {
    await this.post(`/sessions/${this.requireSession()}/start${auto ? '?auto=true' : ''}`);
  }

  async advance(): Promise<void> {
    await this.post(`/sessions/${this.requireSession()}/advance`);
  }

  async view(role: string): Promise<ViewPayload> {
    const response = await this.fetchImpl(
      this.url(`/sessions/${this.requireSession()}/view?role=${encodeURIComponent(role)}`),
    );
    if (!response.ok) await throwServerError(response);
    return parseViewPayload(await response.json());
  }

  async exportCsv(): Promise<string> {
    const response = await this.fetchImpl(
      this.url(`/sessions/${this.requireSession()}/export.csv`),
    );
    if (!response.ok) await throwServerError(response);
    return response.text();
  }

  /**
   * Submit this week's order.  Network failures retry with the same
   * body; the server's first-write-wins rule makes that safe.
   */
  async submitOrder(week: number, quantity: number): Promise<OrderAck> {
    if (this.playerId === null) throw new Error('join a seat before ordering');
    const path = `/sessions/${this.requireSession()}/orders`;
    const body = { player_id: this.playerId, week, quantity };
    let lastFailure: unknown = null;
    for (let attempt = 0; attempt <= this.submitRetries; attempt += 1) {
      try {
        return (await this.post(path, body)) as OrderAck;
      } catch (failure) {
        if (failure instanceof ServerError) throw failure;
        lastFailure = failure; // transport failure: retry idempotently
      }
    }
    throw lastFailure instanceof Error ? lastFailure : new Error('order submission failed');
  }

  websocketUrl(role: string): string {
    const http = this.url(`/sessions/${this.requireSession()}/ws?role=${encodeURIComponent(role)}`);
    return http.replace(/^http/, 'ws');
  }
}

export interface PushHandlers {
  onPayload: (payload: ViewPayload) => void;
  onMalformed?: (message: string) => void;
  onStatus?: (status: 'live' | 'closed') => void;
}

/** Subscribe to pushed views; falls back to the caller on close. */
export function connectPush(client: SessionClient, role: string, handlers: PushHandlers): WebSocket {
  const socket = new WebSocket(client.websocketUrl(role));
  socket.onopen = () => handlers.onStatus?.('live');
  socket.onmessage = (event) => {
    try {
      handlers.onPayload(parseViewPayload(JSON.parse(String(event.data))));
    } catch (failure) {
      handlers.onMalformed?.(failure instanceof Error ? failure.message : String(failure));
    }
  };
  socket.onclose = () => handlers.onStatus?.('closed');
  return socket;
}

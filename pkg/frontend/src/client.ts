/** Typed HTTP client for the cardroom play service. */

export interface ActionSpec {
  kind: string;
  amount?: number;
  cards?: string[];
}

export interface PotView {
  amount: number;
  eligible: number[];
}

/** Redacted state tree as served by get_view: hidden cards appear as "?". */
export interface StateTree {
  flow_cache: string[];
  deck: string[];
  hole: Record<string, string[]>;
  community: string[];
  discards: Record<string, string[]>;
  stacks: Record<string, number>;
  street_bets: Record<string, number>;
  pots: PotView[];
  current_actor: number | null;
  to_act: number[];
  folded: number[];
  all_in: number[];
  button: number;
  messages: string[];
}

export interface View {
  session_id: string;
  seat: number;
  step: number;
  status: "waiting" | "active" | "finished";
  seats: Record<string, string>;
  state: StateTree;
  legal: ActionSpec[];
  your_turn: boolean;
}

export interface SessionInfo {
  session_id: string;
  players: number;
  status: string;
}

export class ApiError extends Error {
  constructor(
    public code: string,
    public detail: string,
    public status: number,
    public legal: ActionSpec[] = [],
  ) {
    super(`${code}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(
      body.error ?? "HttpError",
      body.detail ?? response.statusText,
      response.status,
      body.legal ?? [],
    );
  }
  return body as T;
}

function post<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class GameClient {
  constructor(readonly baseUrl: string) {}

  createSession(script: string, seed?: number): Promise<SessionInfo> {
    return post(`${this.baseUrl}/sessions`, { script, seed });
  }

  join(sessionId: string, seat: number): Promise<View> {
    return post(`${this.baseUrl}/sessions/${sessionId}/join`, { seat });
  }

  addBot(sessionId: string, seat: number, seed: number): Promise<unknown> {
    return post(`${this.baseUrl}/sessions/${sessionId}/bots`, { seat, seed });
  }

  view(sessionId: string, seat: number): Promise<View> {
    return request(`${this.baseUrl}/sessions/${sessionId}/view?seat=${seat}`);
  }

  act(sessionId: string, seat: number, action: ActionSpec): Promise<View> {
    return post(`${this.baseUrl}/sessions/${sessionId}/actions`, { seat, action });
  }

  /** Long-poll: resolves with a view once the session advances past `since`. */
  waitChange(sessionId: string, seat: number, since: number, timeout = 10): Promise<View> {
    const q = `seat=${seat}&since=${since}&timeout=${timeout}`;
    return request(`${this.baseUrl}/sessions/${sessionId}/events?${q}`);
  }

  async log(sessionId: string, mode: "nsp" | "dsp" = "dsp"): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/log?mode=${mode}`);
    if (!response.ok) {
      throw new ApiError("HttpError", response.statusText, response.status);
    }
    return response.text();
  }
}

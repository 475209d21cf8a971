import {
  CategoryView,
  Diagnostic,
  EventMessage,
  FocusEntryWire,
  SessionEvent,
  SessionWire,
  SuggestResponse,
  WireInstance,
} from "./types.js";

/** The subset of fetch the client needs; injectable for tests. */
export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; ok: boolean; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export interface SessionConfigWire {
  scope?: { default?: number; perSig?: Record<string, number> };
  debounceMs?: number;
  solveDelayMs?: number;
  budgetBits?: number;
}

export class ApiClient {
  constructor(
    private fetchFn: FetchLike,
    private base = "",
  ) {}

  private async req(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<unknown> {
    const init: Parameters<FetchLike>[1] = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    const data = (await res.json()) as Record<string, unknown>;
    if (!res.ok) {
      const detail =
        typeof data?.detail === "string" ? data.detail : `HTTP ${res.status}`;
      throw new ApiError(res.status, detail);
    }
    return data;
  }

  openSession(text: string, config: SessionConfigWire = {}): Promise<SessionWire> {
    return this.req("POST", "/sessions", { text, ...config }) as Promise<SessionWire>;
  }

  getSession(id: string): Promise<SessionWire> {
    return this.req("GET", `/sessions/${id}`) as Promise<SessionWire>;
  }

  closeSession(id: string): Promise<unknown> {
    return this.req("DELETE", `/sessions/${id}`);
  }

  edit(
    id: string,
    text: string,
  ): Promise<{ generation: number; diagnostics: Diagnostic[] }> {
    return this.req("POST", `/sessions/${id}/edit`, { text }) as Promise<{
      generation: number;
      diagnostics: Diagnostic[];
    }>;
  }

  waitIdle(id: string, timeout = 30): Promise<{ idle: boolean }> {
    return this.req("POST", `/sessions/${id}/wait?timeout=${timeout}`) as Promise<{
      idle: boolean;
    }>;
  }

  categoryView(id: string, key: string): Promise<CategoryView> {
    return this.req("GET", `/sessions/${id}/categories/${key}`) as Promise<CategoryView>;
  }

  advance(id: string, key: string): Promise<CategoryView> {
    return this.req(
      "POST",
      `/sessions/${id}/categories/${key}/advance`,
    ) as Promise<CategoryView>;
  }

  setVisible(id: string, categories: string[]): Promise<{ visible: string[] }> {
    return this.req("POST", `/sessions/${id}/visible`, {
      categories,
    }) as Promise<{ visible: string[] }>;
  }

  getFocus(id: string): Promise<{ entries: FocusEntryWire[] }> {
    return this.req("GET", `/sessions/${id}/focus`) as Promise<{
      entries: FocusEntryWire[];
    }>;
  }

  pinFocus(
    id: string,
    instance: WireInstance,
    expected: "valid" | "invalid",
  ): Promise<{ entries: FocusEntryWire[] }> {
    return this.req("POST", `/sessions/${id}/focus`, {
      instance,
      expected,
    }) as Promise<{ entries: FocusEntryWire[] }>;
  }

  unpinFocus(id: string, index: number): Promise<{ entries: FocusEntryWire[] }> {
    return this.req("DELETE", `/sessions/${id}/focus/${index}`) as Promise<{
      entries: FocusEntryWire[];
    }>;
  }

  /** Completions at a byte offset; null when the cursor has no context. */
  async suggestions(
    id: string,
    offset: number,
    source?: string,
  ): Promise<SuggestResponse | null> {
    const query = source
      ? `offset=${offset}&source=${encodeURIComponent(source)}`
      : `offset=${offset}`;
    try {
      return (await this.req(
        "GET",
        `/sessions/${id}/suggestions?${query}`,
      )) as SuggestResponse;
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) return null;
      throw err;
    }
  }

  async events(id: string, since = 0): Promise<SessionEvent[]> {
    const data = (await this.req(
      "GET",
      `/sessions/${id}/events?since=${since}`,
    )) as { events: SessionEvent[] };
    return data.events;
  }
}

export function parseEventMessage(raw: string): EventMessage {
  return JSON.parse(raw) as EventMessage;
}

import type { TimerApi } from "../src/timers";
import type { FetchJson, JsonResponse, LeaderboardBody, SeriesBody, SocketsBody } from "../src/types";

/** Let pending promise chains land between simulated timer ticks. */
export async function flush(): Promise<void> {
  for (let i = 0; i < 25; i++) await Promise.resolve();
}

interface Scheduled {
  id: number;
  due: number;
  fn: () => void;
  intervalMs: number | null;
}

/** Deterministic TimerApi: callbacks fire only when the test advances time. */
export class FakeTimers implements TimerApi {
  nowMs = 0;
  private nextId = 1;
  private tasks: Scheduled[] = [];

  setTimeout(fn: () => void, ms: number): number {
    const id = this.nextId++;
    this.tasks.push({ id, due: this.nowMs + ms, fn, intervalMs: null });
    return id;
  }

  clearTimeout(id: number): void {
    this.tasks = this.tasks.filter((t) => t.id !== id);
  }

  setInterval(fn: () => void, ms: number): number {
    const id = this.nextId++;
    this.tasks.push({ id, due: this.nowMs + ms, fn, intervalMs: ms });
    return id;
  }

  clearInterval(id: number): void {
    this.clearTimeout(id);
  }

  /** Advance the clock, firing due callbacks in time order. */
  async advance(ms: number): Promise<void> {
    const end = this.nowMs + ms;
    for (;;) {
      const due = [...this.tasks].filter((t) => t.due <= end).sort((a, b) => a.due - b.due)[0];
      if (due === undefined) break;
      this.nowMs = due.due;
      if (due.intervalMs === null) {
        this.tasks = this.tasks.filter((t) => t.id !== due.id);
      } else {
        due.due += due.intervalMs;
      }
      due.fn();
      await flush();
    }
    this.nowMs = end;
  }
}

export interface RecordedCall {
  path: string;
  method: string;
  body?: unknown;
  headers?: Record<string, string>;
  atMs: number;
}

type Handler = (
  path: string,
  init: { method?: string; body?: unknown; headers?: Record<string, string> },
) => JsonResponse | Promise<JsonResponse>;

/** Route-table transport double recording every call with its fake time. */
export class FakeFetch {
  readonly calls: RecordedCall[] = [];
  failAll = false;
  private readonly routes: Array<{ method: string; prefix: string; handler: Handler }> = [];

  constructor(private readonly clock?: { nowMs: number }) {}

  on(method: string, prefix: string, handler: Handler): this {
    this.routes.push({ method, prefix, handler });
    return this;
  }

  readonly fn: FetchJson = async (path, init = {}) => {
    const method = init.method ?? "GET";
    this.calls.push({
      path,
      method,
      body: init.body,
      headers: init.headers,
      atMs: this.clock?.nowMs ?? 0,
    });
    if (this.failAll) throw new Error("network down");
    const route = this.routes.find((r) => r.method === method && path.startsWith(r.prefix));
    if (route === undefined) return { status: 404, body: { detail: "no such route" } };
    return route.handler(path, init);
  };

  callsTo(prefix: string): RecordedCall[] {
    return this.calls.filter((c) => c.path.startsWith(prefix));
  }
}

export function sampleLeaderboard(overrides: Partial<LeaderboardBody> = {}): LeaderboardBody {
  return {
    date: "2016-09-19",
    as_of: "2016-09-19T14:00:00+00:00",
    site: "CMU",
    incentive_usd: null,
    entries: [
      { participant_id: "p1", score: 940.0, rank: 1, inactive: false },
      { participant_id: "p2", score: 890.0, rank: 2, inactive: false },
      { participant_id: "p3", score: 916.7, rank: 3, inactive: true },
    ],
    ...overrides,
  };
}

export function sampleSeries(overrides: Partial<SeriesBody> = {}): SeriesBody {
  return {
    participant_id: "p1",
    resolution_s: 900,
    points: [
      { t: "2016-09-19T12:00:00+00:00", individual_w: 30.0, pool_w: 41.3 },
      { t: "2016-09-19T12:15:00+00:00", individual_w: 28.0, pool_w: 44.0 },
      { t: "2016-09-19T12:30:00+00:00", individual_w: null, pool_w: 39.1 },
      { t: "2016-09-19T12:45:00+00:00", individual_w: 31.5, pool_w: 40.2 },
    ],
    ...overrides,
  };
}

export function sampleSockets(overrides: Partial<SocketsBody> = {}): SocketsBody {
  return {
    participant_id: "p1",
    sockets: [
      { socket_id: "s1", watts: 12.3, timestamp_utc: "2016-09-19T13:59:00+00:00" },
      { socket_id: "s2", watts: 7.7, timestamp_utc: "2016-09-19T13:59:10+00:00" },
      { socket_id: "s3", watts: 0.4, timestamp_utc: "2016-09-19T13:58:40+00:00" },
    ],
    ...overrides,
  };
}

/** Wire up happy-path routes for every endpoint the dashboard polls. */
export function happyRoutes(fake: FakeFetch): FakeFetch {
  return fake
    .on("GET", "/v1/leaderboard", () => ({ status: 200, body: sampleLeaderboard() }))
    .on("GET", "/v1/notifications", () => ({ status: 200, body: { winner: null } }))
    .on("GET", "/v1/series", () => ({ status: 200, body: sampleSeries() }))
    .on("GET", "/v1/sockets", () => ({ status: 200, body: sampleSockets() }))
    .on("POST", "/v1/screentime-heartbeat", () => ({ status: 204, body: null }))
    .on("POST", "/v1/comfort", (_path, init) => ({ status: 201, body: init.body }));
}

import { visibleFeatures } from "./gating.js";
import { initialState, type DashboardState } from "./state.js";
import type { TimerApi } from "./timers.js";
import type {
  DashboardConfig,
  FetchJson,
  LeaderboardBody,
  NotificationsBody,
  SeriesBody,
  SocketsBody,
} from "./types.js";

export const POLL_INTERVAL_MS = 5_000;
export const POLL_BACKOFF_MS = 30_000;
export const SERIES_WINDOW_S = 24 * 3600;
export const SERIES_RESOLUTION_S = 900;

/**
 * Refreshes dashboard state every 5 s. A failed cycle keeps the last
 * good data, raises the stale flag, and retries on a 30 s backoff until
 * a cycle succeeds again. Only the endpoints the mode actually renders
 * are polled.
 */
export class Poller {
  readonly state: DashboardState = initialState();
  private timerId: number | null = null;
  private running = false;
  private inflight: Promise<void> | null = null;

  constructor(
    private readonly config: DashboardConfig,
    private readonly fetchJson: FetchJson,
    private readonly timers: TimerApi,
    private readonly now: () => number = Date.now,
    private readonly onChange: (state: DashboardState) => void = () => {},
  ) {}

  start(): void {
    if (this.running) return;
    this.running = true;
    this.kick();
  }

  stop(): void {
    this.running = false;
    if (this.timerId !== null) {
      this.timers.clearTimeout(this.timerId);
      this.timerId = null;
    }
  }

  /** Resolves once the in-flight cycle (if any) has landed. */
  settle(): Promise<void> {
    return this.inflight ?? Promise.resolve();
  }

  private kick(): void {
    this.inflight = this.pollOnce().finally(() => {
      this.inflight = null;
      if (!this.running) return;
      const delay = this.state.stale ? POLL_BACKOFF_MS : POLL_INTERVAL_MS;
      this.timerId = this.timers.setTimeout(() => this.kick(), delay);
    });
  }

  async pollOnce(): Promise<void> {
    const features = visibleFeatures(this.config.mode);
    const pid = encodeURIComponent(this.config.participantId);
    let failed = false;

    const get = async (path: string): Promise<unknown | undefined> => {
      try {
        const res = await this.fetchJson(path);
        if (res.status === 200) return res.body;
        if (res.status === 409 && path.startsWith("/v1/leaderboard")) {
          // Not an outage: the service has no scorable baselines yet.
          this.state.preBaseline = true;
          this.state.leaderboard = null;
          return undefined;
        }
        failed = true;
        return undefined;
      } catch {
        failed = true;
        return undefined;
      }
    };

    if (features.has("scoreboard")) {
      const lb = await get(`/v1/leaderboard?site=${encodeURIComponent(this.config.site)}`);
      if (lb !== undefined) {
        this.state.leaderboard = lb as LeaderboardBody;
        this.state.preBaseline = false;
      }
      const notif = await get(`/v1/notifications?participant=${pid}`);
      if (notif !== undefined) this.state.winner = (notif as NotificationsBody).winner;
    }
    if (features.has("series")) {
      const toMs = this.now();
      const fromIso = new Date(toMs - SERIES_WINDOW_S * 1000).toISOString();
      const toIso = new Date(toMs).toISOString();
      const s = await get(
        `/v1/series?participant=${pid}&from=${encodeURIComponent(fromIso)}` +
          `&to=${encodeURIComponent(toIso)}&resolution=${SERIES_RESOLUTION_S}`,
      );
      if (s !== undefined) this.state.series = s as SeriesBody;
    }
    if (features.has("dial") || features.has("socket-bars")) {
      const s = await get(`/v1/sockets?participant=${pid}`);
      if (s !== undefined) this.state.sockets = s as SocketsBody;
    }
    this.state.stale = failed;
    this.onChange(this.state);
  }
}

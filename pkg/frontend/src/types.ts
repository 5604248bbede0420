/** Payload shapes served by the scoring service's JSON API. */

export interface LeaderboardEntry {
  participant_id: string;
  score: number;
  rank: number;
  inactive: boolean;
}

export interface LeaderboardBody {
  date: string;
  as_of: string;
  site: string;
  incentive_usd: number | null;
  entries: LeaderboardEntry[];
}

export interface SeriesPoint {
  t: string;
  individual_w: number | null;
  pool_w: number | null;
}

export interface SeriesBody {
  participant_id: string;
  resolution_s: number;
  points: SeriesPoint[];
}

export interface SocketReading {
  socket_id: string;
  watts: number;
  timestamp_utc: string;
}

export interface SocketsBody {
  participant_id: string;
  sockets: SocketReading[];
}

export interface WinnerRecord {
  date: string;
  participant_id: string;
  amount_usd: number | null;
}

export interface NotificationsBody {
  winner: WinnerRecord | null;
}

/** Minimal HTTP response surface the dashboard consumes. */
export interface JsonResponse {
  status: number;
  body: unknown;
}

/**
 * Injectable transport: same contract as a thin fetch wrapper, but pure
 * data-in/data-out so every module stays testable without a browser.
 */
export type FetchJson = (
  path: string,
  init?: { method?: string; body?: unknown; headers?: Record<string, string> },
) => Promise<JsonResponse>;

export type DashboardMode = "incentive-only" | "feedback-only" | "full" | "operator";

export interface DashboardConfig {
  participantId: string;
  site: string;
  mode: DashboardMode;
  /** Calibrated baseline active average driving the dial scale, in watts. */
  zenithWatts: number;
  operatorToken?: string;
}

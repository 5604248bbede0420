import type {
  LeaderboardBody,
  SeriesBody,
  SocketsBody,
  WinnerRecord,
} from "./types.js";

/** Everything the render layer needs; owned by the poller and actions. */
export interface DashboardState {
  leaderboard: LeaderboardBody | null;
  /** True when the service reports that no baseline scores exist yet. */
  preBaseline: boolean;
  series: SeriesBody | null;
  sockets: SocketsBody | null;
  winner: WinnerRecord | null;
  /** True after a failed poll until the next successful one. */
  stale: boolean;
  comfortSelection: number | null;
  comfortError: string | null;
  comfortSaved: boolean;
  operatorNotice: string | null;
}

export function initialState(): DashboardState {
  return {
    leaderboard: null,
    preBaseline: false,
    series: null,
    sockets: null,
    winner: null,
    stale: false,
    comfortSelection: null,
    comfortError: null,
    comfortSaved: false,
    operatorNotice: null,
  };
}

/** Live draw shown on the dial: the sum of the latest per-socket readings. */
export function currentDrawWatts(sockets: SocketsBody | null): number | null {
  if (sockets === null) return null;
  return sockets.sockets.reduce((acc, s) => acc + s.watts, 0);
}

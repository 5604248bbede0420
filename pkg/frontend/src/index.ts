export { ackWinner, postIncentive, sendHeartbeat, submitComfort } from "./actions.js";
export { Dashboard } from "./app.js";
export { dialView, GREEN_BAND_FRACTION, type DialBand, type DialView } from "./dial.js";
export { ALL_FEATURES, isVisible, visibleFeatures, type Feature } from "./gating.js";
export { HEARTBEAT_INTERVAL_MS, HeartbeatScheduler } from "./heartbeat.js";
export { httpJson } from "./http.js";
export { mountDashboard } from "./mount.js";
export {
  POLL_BACKOFF_MS,
  POLL_INTERVAL_MS,
  Poller,
  SERIES_RESOLUTION_S,
  SERIES_WINDOW_S,
} from "./poll.js";
export { seriesScale, type SeriesScale } from "./series.js";
export { currentDrawWatts, initialState, type DashboardState } from "./state.js";
export { realTimers, type TimerApi } from "./timers.js";
export type {
  DashboardConfig,
  DashboardMode,
  FetchJson,
  JsonResponse,
  LeaderboardBody,
  LeaderboardEntry,
  NotificationsBody,
  SeriesBody,
  SeriesPoint,
  SocketReading,
  SocketsBody,
  WinnerRecord,
} from "./types.js";
export {
  COMFORT_LEVELS,
  INCENTIVE_CHOICES_USD,
  escapeHtml,
  renderComfort,
  renderDashboard,
  renderDial,
  renderOperatorPanel,
  renderScoreboard,
  renderSeries,
  renderSocketBars,
  renderStaleBadge,
} from "./views.js";

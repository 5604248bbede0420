import { dialView, type DialView } from "./dial.js";
import { visibleFeatures } from "./gating.js";
import { seriesScale } from "./series.js";
import { currentDrawWatts, type DashboardState } from "./state.js";
import type {
  DashboardConfig,
  LeaderboardBody,
  SeriesBody,
  SeriesPoint,
  SocketsBody,
  WinnerRecord,
} from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const fmtW = (w: number): string => w.toFixed(1);

export function renderDial(view: DialView): string {
  return [
    `<section data-widget="dial" data-band="${view.band}"`,
    ` data-saturated="${view.saturated}" data-needle="${view.needle.toFixed(3)}"`,
    ` data-current-watts="${fmtW(view.currentWatts)}"`,
    ` data-zenith-watts="${fmtW(view.zenithWatts)}">`,
    `<h2>Live draw</h2>`,
    `<p class="dial-reading">${fmtW(view.currentWatts)} W of ${fmtW(view.zenithWatts)} W</p>`,
    view.saturated ? `<p class="dial-alert">above your typical active draw</p>` : ``,
    `</section>`,
  ].join("");
}

export function renderDialPlaceholder(): string {
  return `<section data-widget="dial" data-band="none"><p>awaiting socket data</p></section>`;
}

function winnerBanner(winner: WinnerRecord | null): string {
  if (winner === null) return "";
  const amount = winner.amount_usd === null ? "" : ` $${winner.amount_usd}`;
  return (
    `<p data-widget="winner-banner" data-date="${escapeHtml(winner.date)}">` +
    `${escapeHtml(winner.participant_id)} won${amount} on ${escapeHtml(winner.date)}</p>`
  );
}

/**
 * Ranked table rendered strictly in payload order: the service owns the
 * ordering (score, inactivity, ties) and the client never re-sorts.
 */
export function renderScoreboard(
  leaderboard: LeaderboardBody | null,
  winner: WinnerRecord | null,
  selfId: string,
  preBaseline: boolean,
): string {
  const parts: string[] = [`<section data-widget="scoreboard">`, `<h2>Scoreboard</h2>`];
  if (preBaseline) {
    parts.push(`<p class="pre-baseline">scores begin once baseline data exists</p>`);
  } else if (leaderboard === null) {
    parts.push(`<p>awaiting scores</p>`);
  } else {
    if (leaderboard.incentive_usd !== null) {
      parts.push(
        `<p data-widget="incentive-banner">today's incentive: $${leaderboard.incentive_usd}</p>`,
      );
    }
    parts.push(winnerBanner(winner));
    parts.push(`<table><thead><tr><th>rank</th><th>who</th><th>score</th></tr></thead><tbody>`);
    for (const e of leaderboard.entries) {
      const self = e.participant_id === selfId ? ` class="self"` : "";
      const score = e.inactive ? "inactive" : e.score.toFixed(1);
      parts.push(
        `<tr${self} data-pid="${escapeHtml(e.participant_id)}" data-rank="${e.rank}"` +
          ` data-inactive="${e.inactive}"><td>${e.rank}</td>` +
          `<td>${escapeHtml(e.participant_id)}</td><td>${score}</td></tr>`,
      );
    }
    parts.push(`</tbody></table>`);
  }
  parts.push(`</section>`);
  return parts.join("");
}

function polylineSegments(
  points: readonly SeriesPoint[],
  pick: (p: SeriesPoint) => number | null,
  yMax: number,
): string[] {
  const n = points.length;
  const segments: string[] = [];
  let current: string[] = [];
  points.forEach((p, i) => {
    const v = pick(p);
    if (v === null) {
      if (current.length > 0) segments.push(current.join(" "));
      current = [];
      return;
    }
    const x = n === 1 ? 0 : i / (n - 1);
    const y = 1 - v / yMax;
    current.push(`${x.toFixed(4)},${y.toFixed(4)}`);
  });
  if (current.length > 0) segments.push(current.join(" "));
  return segments;
}

/** Individual vs. pool traces, axes fitted to the window on screen. */
export function renderSeries(body: SeriesBody | null): string {
  if (body === null) {
    return `<section data-widget="series"><p>awaiting history</p></section>`;
  }
  const scale = seriesScale(body);
  const traces = (name: string, pick: (p: SeriesPoint) => number | null): string =>
    polylineSegments(body.points, pick, scale.yMaxWatts)
      .map((seg) => `<polyline data-trace="${name}" points="${seg}"/>`)
      .join("");
  return [
    `<section data-widget="series" data-y-max-watts="${fmtW(scale.yMaxWatts)}"`,
    ` data-from="${escapeHtml(scale.tFrom)}" data-to="${escapeHtml(scale.tTo)}">`,
    `<h2>You vs. the pool</h2>`,
    `<svg viewBox="0 0 1 1" preserveAspectRatio="none">`,
    traces("individual", (p) => p.individual_w),
    traces("pool", (p) => p.pool_w),
    `</svg>`,
    `</section>`,
  ].join("");
}

/** One bar per socket; the bar watts sum to the dial's current draw. */
export function renderSocketBars(sockets: SocketsBody | null): string {
  if (sockets === null) {
    return `<section data-widget="socket-bars"><p>awaiting socket data</p></section>`;
  }
  const total = currentDrawWatts(sockets) ?? 0;
  const maxW = Math.max(1, ...sockets.sockets.map((s) => s.watts));
  const bars = sockets.sockets
    .map(
      (s) =>
        `<div class="socket-bar" data-socket="${escapeHtml(s.socket_id)}"` +
        ` data-watts="${fmtW(s.watts)}" style="width:${((100 * s.watts) / maxW).toFixed(1)}%">` +
        `${escapeHtml(s.socket_id)}: ${fmtW(s.watts)} W</div>`,
    )
    .join("");
  return (
    `<section data-widget="socket-bars" data-total-watts="${fmtW(total)}">` +
    `<h2>Per socket</h2>${bars}</section>`
  );
}

export const COMFORT_LEVELS: readonly number[] = [-3, -2, -1, 0, 1, 2, 3];

export function renderComfort(selection: number | null, error: string | null, saved: boolean): string {
  const buttons = COMFORT_LEVELS.map((level) => {
    const checked = selection === level ? ` checked` : "";
    return (
      `<label><input type="radio" name="comfort" value="${level}"` +
      `${checked} data-comfort-level="${level}"/>${level > 0 ? `+${level}` : level}</label>`
    );
  }).join("");
  return [
    `<section data-widget="comfort">`,
    `<h2>Comfort</h2>`,
    `<p>-3 = very uncomfortable, 0 = neutral, +3 = very comfortable</p>`,
    buttons,
    error !== null ? `<p class="inline-error" data-widget="comfort-error">${escapeHtml(error)}</p>` : ``,
    saved ? `<p class="saved" data-widget="comfort-saved">saved</p>` : ``,
    `</section>`,
  ].join("");
}

export const INCENTIVE_CHOICES_USD: readonly number[] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

export function renderOperatorPanel(notice: string | null): string {
  const options = INCENTIVE_CHOICES_USD.map((a) => `<option value="${a}">$${a}</option>`).join("");
  return [
    `<section data-widget="operator-panel">`,
    `<h2>Post incentive</h2>`,
    `<input type="date" name="incentive-date"/>`,
    `<select name="incentive-amount">${options}</select>`,
    `<button name="post-incentive">post</button>`,
    notice !== null ? `<p class="inline-error" data-widget="operator-notice">${escapeHtml(notice)}</p>` : ``,
    `</section>`,
  ].join("");
}

export function renderStaleBadge(stale: boolean): string {
  return stale ? `<span data-widget="stale-badge">connection lost — showing last data</span>` : "";
}

/** Full page body: widgets composed strictly per the mode's feature set. */
export function renderDashboard(state: DashboardState, config: DashboardConfig): string {
  const features = visibleFeatures(config.mode);
  const parts: string[] = [`<main data-mode="${config.mode}">`, renderStaleBadge(state.stale)];
  if (features.has("dial")) {
    const current = currentDrawWatts(state.sockets);
    parts.push(current === null ? renderDialPlaceholder() : renderDial(dialView(current, config.zenithWatts)));
  }
  if (features.has("scoreboard")) {
    parts.push(renderScoreboard(state.leaderboard, state.winner, config.participantId, state.preBaseline));
  }
  if (features.has("series")) {
    parts.push(renderSeries(state.series));
  }
  if (features.has("socket-bars")) {
    parts.push(renderSocketBars(state.sockets));
  }
  if (features.has("comfort")) {
    parts.push(renderComfort(state.comfortSelection, state.comfortError, state.comfortSaved));
  }
  if (features.has("operator-panel")) {
    parts.push(renderOperatorPanel(state.operatorNotice));
  }
  parts.push(`</main>`);
  return parts.join("");
}

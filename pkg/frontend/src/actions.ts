import type { DashboardState } from "./state.js";
import type { FetchJson } from "./types.js";

function detailOf(body: unknown): string | null {
  if (typeof body === "object" && body !== null && "detail" in body) {
    const d = (body as { detail: unknown }).detail;
    if (typeof d === "string") return d;
  }
  return null;
}

/**
 * Post a comfort vote. The rendered selection follows what the server
 * accepted: it moves on 201 and stays put (with the rejection shown
 * inline) on anything else.
 */
export async function submitComfort(
  fetchJson: FetchJson,
  state: DashboardState,
  participantId: string,
  level: number,
): Promise<void> {
  const res = await fetchJson("/v1/comfort", {
    method: "POST",
    body: { participant_id: participantId, level },
  });
  if (res.status === 201) {
    state.comfortSelection = level;
    state.comfortError = null;
    state.comfortSaved = true;
  } else {
    state.comfortError = detailOf(res.body) ?? `comfort vote rejected (HTTP ${res.status})`;
    state.comfortSaved = false;
  }
}

/**
 * Operator-only: post the day's incentive. Success and rejection both
 * land as an inline notice; the occupant-facing banner appears only when
 * the next poll returns the amount from the service.
 */
export async function postIncentive(
  fetchJson: FetchJson,
  state: DashboardState,
  operatorToken: string | undefined,
  dateIso: string,
  amountUsd: number,
): Promise<void> {
  const res = await fetchJson("/v1/incentives", {
    method: "POST",
    body: { date: dateIso, amount_usd: amountUsd },
    headers: operatorToken === undefined ? {} : { "X-Operator-Token": operatorToken },
  });
  if (res.status === 201) {
    state.operatorNotice = `posted $${amountUsd} for ${dateIso}`;
  } else {
    state.operatorNotice = detailOf(res.body) ?? `incentive rejected (HTTP ${res.status})`;
  }
}

/** Fire-and-forget screentime beat; a lost beat only shortens a session. */
export async function sendHeartbeat(fetchJson: FetchJson, participantId: string): Promise<void> {
  try {
    await fetchJson("/v1/screentime-heartbeat", {
      method: "POST",
      body: { participant_id: participantId },
    });
  } catch {
    // Network blips must never break the dashboard loop.
  }
}

/** Dismiss the winner banner; it stays gone once the server records the ack. */
export async function ackWinner(
  fetchJson: FetchJson,
  state: DashboardState,
  participantId: string,
): Promise<void> {
  if (state.winner === null) return;
  const res = await fetchJson("/v1/notifications/ack", {
    method: "POST",
    body: { participant_id: participantId, date: state.winner.date },
  });
  if (res.status === 204) state.winner = null;
}

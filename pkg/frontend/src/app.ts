import { ackWinner, postIncentive, sendHeartbeat, submitComfort } from "./actions.js";
import { HeartbeatScheduler } from "./heartbeat.js";
import { Poller } from "./poll.js";
import type { TimerApi } from "./timers.js";
import type { DashboardConfig, FetchJson } from "./types.js";
import { renderDashboard } from "./views.js";

/**
 * Wires polling, screentime heartbeats, and user actions around one
 * shared state object. The host supplies transport, timers, and a sink
 * for rendered HTML, so the whole loop runs headless under test.
 */
export class Dashboard {
  readonly poller: Poller;
  readonly heartbeats: HeartbeatScheduler;

  constructor(
    private readonly config: DashboardConfig,
    private readonly fetchJson: FetchJson,
    timers: TimerApi,
    now: () => number = Date.now,
    private readonly onRender: (html: string) => void = () => {},
  ) {
    this.poller = new Poller(config, fetchJson, timers, now, () => this.renderNow());
    this.heartbeats = new HeartbeatScheduler(
      () => void sendHeartbeat(fetchJson, config.participantId),
      timers,
    );
  }

  start(visible = true): void {
    this.poller.start();
    // Screentime is an occupant measure; operator consoles do not log it.
    if (this.config.mode !== "operator") this.heartbeats.start(visible);
  }

  stop(): void {
    this.poller.stop();
    this.heartbeats.stop();
  }

  setVisible(visible: boolean): void {
    this.heartbeats.setVisible(visible);
  }

  html(): string {
    return renderDashboard(this.poller.state, this.config);
  }

  async submitComfort(level: number): Promise<void> {
    await submitComfort(this.fetchJson, this.poller.state, this.config.participantId, level);
    this.renderNow();
  }

  async postIncentive(dateIso: string, amountUsd: number): Promise<void> {
    await postIncentive(this.fetchJson, this.poller.state, this.config.operatorToken, dateIso, amountUsd);
    this.renderNow();
  }

  async acknowledgeWinner(): Promise<void> {
    await ackWinner(this.fetchJson, this.poller.state, this.config.participantId);
    this.renderNow();
  }

  private renderNow(): void {
    this.onRender(this.html());
  }
}

import type { TimerApi } from "./timers.js";

export const HEARTBEAT_INTERVAL_MS = 30_000;

/**
 * Emits screentime heartbeats while the window is visible and pauses the
 * moment it is hidden, so the server-side session log reflects actual
 * attention. A beat fires immediately on becoming visible and then every
 * 30 s, which yields exactly two beats per fully active minute.
 */
export class HeartbeatScheduler {
  private intervalId: number | null = null;
  private running = false;

  constructor(
    private readonly sendBeat: () => void,
    private readonly timers: TimerApi,
    private readonly intervalMs: number = HEARTBEAT_INTERVAL_MS,
  ) {}

  /** Begin emitting; `visible` reflects the window's initial visibility. */
  start(visible: boolean): void {
    this.running = true;
    this.setVisible(visible);
  }

  /** Notify the scheduler of a visibility change. Idempotent per state. */
  setVisible(visible: boolean): void {
    if (!this.running) return;
    if (visible && this.intervalId === null) {
      this.sendBeat();
      this.intervalId = this.timers.setInterval(() => this.sendBeat(), this.intervalMs);
    } else if (!visible && this.intervalId !== null) {
      this.timers.clearInterval(this.intervalId);
      this.intervalId = null;
    }
  }

  stop(): void {
    this.running = false;
    if (this.intervalId !== null) {
      this.timers.clearInterval(this.intervalId);
      this.intervalId = null;
    }
  }
}

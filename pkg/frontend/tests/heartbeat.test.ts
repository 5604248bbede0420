import { describe, expect, it } from "vitest";

import { HeartbeatScheduler } from "../src/heartbeat";
import { FakeTimers } from "./helpers";

function setup(): { timers: FakeTimers; beats: number[]; hb: HeartbeatScheduler } {
  const timers = new FakeTimers();
  const beats: number[] = [];
  const hb = new HeartbeatScheduler(() => beats.push(timers.nowMs), timers);
  return { timers, beats, hb };
}

describe("screentime heartbeats", () => {
  it("emits exactly two beats over a fully active minute", async () => {
    const { timers, beats, hb } = setup();
    hb.start(true);
    await timers.advance(59_999);
    expect(beats).toEqual([0, 30_000]);
    await timers.advance(1);
    expect(beats).toEqual([0, 30_000, 60_000]);
  });

  it("emits nothing while the tab stays hidden", async () => {
    const { timers, beats, hb } = setup();
    hb.start(true);
    await timers.advance(60_000);
    const before = beats.length;
    hb.setVisible(false);
    await timers.advance(300_000);
    expect(beats.length).toBe(before);
  });

  it("resumes with an immediate beat when the tab becomes visible again", async () => {
    const { timers, beats, hb } = setup();
    hb.start(true);
    await timers.advance(10_000);
    hb.setVisible(false);
    await timers.advance(120_000);
    hb.setVisible(true);
    expect(beats.at(-1)).toBe(130_000);
    await timers.advance(30_000);
    expect(beats.at(-1)).toBe(160_000);
  });

  it("starts silent when the window opens hidden", async () => {
    const { timers, beats, hb } = setup();
    hb.start(false);
    await timers.advance(90_000);
    expect(beats).toEqual([]);
    hb.setVisible(true);
    expect(beats).toEqual([90_000]);
  });

  it("does not double-beat on redundant visibility notifications", async () => {
    const { timers, beats, hb } = setup();
    hb.start(true);
    hb.setVisible(true);
    hb.setVisible(true);
    await timers.advance(0);
    expect(beats).toEqual([0]);
  });

  it("stop() ends the stream for good", async () => {
    const { timers, beats, hb } = setup();
    hb.start(true);
    await timers.advance(30_000);
    hb.stop();
    await timers.advance(300_000);
    expect(beats).toEqual([0, 30_000]);
    hb.setVisible(true);
    expect(beats).toEqual([0, 30_000]);
  });
});

import { describe, expect, it } from "vitest";

import { dialView } from "../src/dial";

describe("dial view model", () => {
  it("places the needle at current/zenith below the zenith", () => {
    const v = dialView(30, 60);
    expect(v.needle).toBeCloseTo(0.5, 12);
    expect(v.saturated).toBe(false);
    expect(v.band).toBe("green");
  });

  it("pegs the needle at 1 and saturates above the zenith", () => {
    const v = dialView(61, 60);
    expect(v.needle).toBe(1);
    expect(v.saturated).toBe(true);
    expect(v.band).toBe("red");
  });

  it("at exactly the zenith the needle is maxed but not saturated", () => {
    const v = dialView(60, 60);
    expect(v.needle).toBe(1);
    expect(v.saturated).toBe(false);
    expect(v.band).toBe("yellow");
  });

  it("turns yellow at exactly 60% of the zenith", () => {
    expect(dialView(36, 60).band).toBe("yellow");
    expect(dialView(35.999, 60).band).toBe("green");
  });

  it("reads zero draw as a green dial at rest", () => {
    const v = dialView(0, 60);
    expect(v.needle).toBe(0);
    expect(v.band).toBe("green");
    expect(v.saturated).toBe(false);
  });

  it("reports band edges in watts", () => {
    const v = dialView(10, 50);
    expect(v.greenMaxWatts).toBeCloseTo(30, 12);
    expect(v.yellowMaxWatts).toBe(50);
  });

  it("rejects a non-positive or non-finite zenith", () => {
    expect(() => dialView(10, 0)).toThrow(RangeError);
    expect(() => dialView(10, -5)).toThrow(RangeError);
    expect(() => dialView(10, Number.NaN)).toThrow(RangeError);
    expect(() => dialView(10, Number.POSITIVE_INFINITY)).toThrow(RangeError);
  });

  it("rejects a negative or non-finite current draw", () => {
    expect(() => dialView(-1, 50)).toThrow(RangeError);
    expect(() => dialView(Number.NaN, 50)).toThrow(RangeError);
  });

  it("far beyond the zenith the needle still reads exactly 1", () => {
    expect(dialView(5000, 50).needle).toBe(1);
  });
});

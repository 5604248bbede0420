/**
 * Analog-dial view model: maps a participant's current draw onto a
 * 0..1 needle position against their calibrated zenith (baseline
 * active average).
 */

export type DialBand = "green" | "yellow" | "red";

export interface DialView {
  currentWatts: number;
  zenithWatts: number;
  /** Needle position within [0, 1]; pegged at 1 once current >= zenith. */
  needle: number;
  /** True exactly when current draw exceeds the zenith. */
  saturated: boolean;
  band: DialBand;
  /** Upper edge of the green band in watts (60% of zenith). */
  greenMaxWatts: number;
  /** Upper edge of the yellow band in watts (the zenith itself). */
  yellowMaxWatts: number;
}

export const GREEN_BAND_FRACTION = 0.6;

export function dialView(currentWatts: number, zenithWatts: number): DialView {
  if (!Number.isFinite(zenithWatts) || zenithWatts <= 0) {
    throw new RangeError(`zenith must be a positive number of watts, got ${zenithWatts}`);
  }
  if (!Number.isFinite(currentWatts) || currentWatts < 0) {
    throw new RangeError(`current draw must be finite and non-negative, got ${currentWatts}`);
  }
  const ratio = currentWatts / zenithWatts;
  const saturated = currentWatts > zenithWatts;
  const band: DialBand = saturated ? "red" : ratio >= GREEN_BAND_FRACTION ? "yellow" : "green";
  return {
    currentWatts,
    zenithWatts,
    needle: Math.min(ratio, 1),
    saturated,
    band,
    greenMaxWatts: GREEN_BAND_FRACTION * zenithWatts,
    yellowMaxWatts: zenithWatts,
  };
}

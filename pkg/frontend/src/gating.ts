import type { DashboardMode } from "./types.js";

/**
 * Every distinct widget the dashboard can show. The scoreboard feature
 * bundles the ranked table with its incentive banner and winner banner:
 * all three exist only where the competitive scoreboard does.
 */
export type Feature =
  | "dial"
  | "scoreboard"
  | "series"
  | "socket-bars"
  | "comfort"
  | "operator-panel";

export const ALL_FEATURES: readonly Feature[] = [
  "dial",
  "scoreboard",
  "series",
  "socket-bars",
  "comfort",
  "operator-panel",
];

const OCCUPANT_FEEDBACK: readonly Feature[] = ["dial", "series", "socket-bars", "comfort"];

/**
 * Which widgets a dashboard in the given mode renders.
 *
 * - incentive-only: the scoreboard alone.
 * - feedback-only: every occupant widget except the scoreboard.
 * - full: every occupant widget.
 * - operator: everything, plus the incentive-posting panel.
 */
export function visibleFeatures(mode: DashboardMode): ReadonlySet<Feature> {
  switch (mode) {
    case "incentive-only":
      return new Set<Feature>(["scoreboard"]);
    case "feedback-only":
      return new Set<Feature>(OCCUPANT_FEEDBACK);
    case "full":
      return new Set<Feature>([...OCCUPANT_FEEDBACK, "scoreboard"]);
    case "operator":
      return new Set<Feature>([...OCCUPANT_FEEDBACK, "scoreboard", "operator-panel"]);
  }
}

export function isVisible(mode: DashboardMode, feature: Feature): boolean {
  return visibleFeatures(mode).has(feature);
}

import type { SeriesBody, SeriesPoint } from "./types.js";

export interface SeriesScale {
  tFrom: string;
  tTo: string;
  /** Top of the y axis: the largest plotted value, never below 1 W. */
  yMaxWatts: number;
}

/**
 * Axis bounds fitted to the window actually on screen: x spans the
 * returned points, y spans from zero to the largest value present in
 * either the individual or the pool trace.
 */
export function seriesScale(body: SeriesBody): SeriesScale {
  const points = body.points;
  if (points.length === 0) {
    return { tFrom: "", tTo: "", yMaxWatts: 1 };
  }
  let yMax = 0;
  for (const p of points) {
    if (p.individual_w !== null) yMax = Math.max(yMax, p.individual_w);
    if (p.pool_w !== null) yMax = Math.max(yMax, p.pool_w);
  }
  const first = points[0] as SeriesPoint;
  const last = points[points.length - 1] as SeriesPoint;
  return { tFrom: first.t, tTo: last.t, yMaxWatts: Math.max(yMax, 1) };
}

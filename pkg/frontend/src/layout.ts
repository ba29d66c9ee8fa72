/**
 * Pure view geometry: which rectangles to draw where, given a score, a
 * viewport, and the view state. Kept free of the DOM so the invariants
 * (hidden tracks collapse without rescaling time, playhead maps linearly)
 * are testable headlessly.
 */

import type { ScoreDoc } from "./score.js";
import type { ViewState } from "./viewstate.js";

export interface BlockRect {
  id: string;
  track: number;
  x: number;
  y: number;
  width: number;
  height: number;
  karma: string;
  nuance: string;
}

export interface LaneLayout {
  blocks: BlockRect[];
  /** lane row index per visible track, in track order */
  lanes: Map<number, number>;
  laneHeight: number;
}

/** Time-to-x over an arbitrary window; the global view passes [0, duration]. */
export function timeToX(t: number, t0: number, t1: number, width: number): number {
  if (t1 <= t0) return 0;
  return ((t - t0) / (t1 - t0)) * width;
}

/**
 * Local view: only visible tracks get lanes (vertical packing changes,
 * the time axis does not), and only blocks intersecting the window appear.
 */
export function localLayout(
  score: ScoreDoc,
  view: ViewState,
  width: number,
  height: number,
): LaneLayout {
  const visible = view.visibleTracks(score.tracks.length);
  const lanes = new Map<number, number>();
  visible.forEach((track, row) => lanes.set(track, row));
  const laneHeight = visible.length ? height / visible.length : height;
  const [t0, t1] = view.window;
  const blocks: BlockRect[] = [];
  for (const b of score.events) {
    const row = lanes.get(b.track);
    if (row === undefined) continue;
    const end = b.start + b.duration;
    if (end <= t0 || b.start >= t1) continue;
    const x = timeToX(Math.max(b.start, t0), t0, t1, width);
    const x1 = timeToX(Math.min(end, t1), t0, t1, width);
    blocks.push({
      id: b.id,
      track: b.track,
      x,
      y: row * laneHeight,
      width: Math.max(x1 - x, 1),
      height: laneHeight,
      karma: b.props.karma,
      nuance: b.props.nuance,
    });
  }
  return { blocks, lanes, laneHeight };
}

/** Global view: every track, the whole timeline. */
export function globalLayout(
  score: ScoreDoc,
  width: number,
  height: number,
): LaneLayout {
  const lanes = new Map<number, number>();
  for (let i = 0; i < score.tracks.length; i++) lanes.set(i, i);
  const laneHeight = score.tracks.length ? height / score.tracks.length : height;
  const t1 = Math.max(score.duration, 1);
  const blocks: BlockRect[] = score.events.map((b) => ({
    id: b.id,
    track: b.track,
    x: timeToX(b.start, 0, t1, width),
    y: (lanes.get(b.track) ?? 0) * laneHeight,
    width: Math.max(timeToX(b.duration, 0, t1, width), 1),
    height: laneHeight,
    karma: b.props.karma,
    nuance: b.props.nuance,
  }));
  return { blocks, lanes, laneHeight };
}

/** Deterministic karma color: hashed hue, fixed saturation/lightness. */
export function karmaColor(karma: string): string {
  let hash = 0;
  for (let i = 0; i < karma.length; i++) {
    hash = (hash * 31 + karma.charCodeAt(i)) >>> 0;
  }
  return `hsl(${hash % 360}, 55%, 42%)`;
}

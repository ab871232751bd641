/**
 * Pure timeline geometry: mapping between chart pixels and frame indices,
 * band hit-testing, and cursor seeking. The DOM layer draws with these.
 */
import type { SmokeEvent, Timeline } from './schemas.js';

export interface ChartGeometry {
  width: number; // drawable width in pixels
  frameStart: number; // first frame shown (inclusive)
  frameEnd: number; // last frame shown (exclusive)
}

export function frameAtX(geometry: ChartGeometry, x: number): number {
  const span = geometry.frameEnd - geometry.frameStart;
  const clamped = Math.min(Math.max(x, 0), geometry.width);
  const frame = geometry.frameStart + (clamped / geometry.width) * span;
  return Math.min(Math.floor(frame), geometry.frameEnd - 1);
}

export function xAtFrame(geometry: ChartGeometry, frame: number): number {
  const span = geometry.frameEnd - geometry.frameStart;
  return ((frame - geometry.frameStart) / span) * geometry.width;
}

export function eventAt(events: SmokeEvent[], frame: number): SmokeEvent | null {
  for (const event of events) {
    if (frame >= event.start && frame < event.end) {
      return event;
    }
  }
  return null;
}

/**
 * Cursor position for a click: clicking inside an event band seeks to the
 * nearest sampled polyline frame inside that event (so the viewer lands on
 * a frame that actually carries a response sample); elsewhere it seeks to
 * the frame under the pointer.
 */
export function seekForClick(
  timeline: Timeline,
  geometry: ChartGeometry,
  x: number,
): number {
  const raw = frameAtX(geometry, x);
  const band = eventAt(timeline.events, raw);
  if (!band) {
    return raw;
  }
  const inside = timeline.polyline
    .map(([frame]) => frame)
    .filter((frame) => frame >= band.start && frame < band.end);
  if (inside.length === 0) {
    return band.peak_index;
  }
  let best = inside[0]!;
  for (const frame of inside) {
    if (Math.abs(frame - raw) < Math.abs(best - raw)) {
      best = frame;
    }
  }
  return best;
}

export function stepCursor(
  timeline: Timeline,
  cursor: number,
  delta: number,
): number {
  const [start, end] = timeline.frame_range;
  return Math.min(Math.max(cursor + delta, start), end - 1);
}

export function isWarmup(timeline: Timeline, frame: number): boolean {
  if (!timeline.warmup_span) {
    return false;
  }
  const [start, end] = timeline.warmup_span;
  return frame >= start && frame < end;
}

import { describe, expect, it } from 'vitest';

import type { ChartGeometry } from '../src/timeline';
import {
  eventAt,
  frameAtX,
  isWarmup,
  seekForClick,
  stepCursor,
  xAtFrame,
} from '../src/timeline';
import { events, PLUME_SPAN, timeline } from './fixtures';

const geometry: ChartGeometry = {
  width: 960,
  frameStart: timeline.frame_range[0],
  frameEnd: timeline.frame_range[1],
};

describe('timeline seeking', () => {
  it('clicking the event band seeks into the plume interval', () => {
    const event = events[0]!;
    const bandCenter = xAtFrame(geometry, Math.floor((event.start + event.end) / 2));
    const frame = seekForClick(timeline, geometry, bandCenter);
    expect(frame).toBeGreaterThanOrEqual(PLUME_SPAN[0]);
    expect(frame).toBeLessThan(PLUME_SPAN[1]);
    expect(frame).toBeGreaterThanOrEqual(event.start);
    expect(frame).toBeLessThan(event.end);
  });

  it('clicking a band seeks to a sampled polyline frame inside it', () => {
    const event = events[0]!;
    const x = xAtFrame(geometry, event.start + 1);
    const frame = seekForClick(timeline, geometry, x);
    const sampled = timeline.polyline.map(([f]) => f);
    expect(sampled).toContain(frame);
  });

  it('clicking outside bands seeks to the frame under the pointer', () => {
    const frame = seekForClick(timeline, geometry, xAtFrame(geometry, 200));
    expect(eventAt(events, frame)).toBeNull();
    expect(frame).toBe(200);
  });

  it('pixel-to-frame mapping is monotone and clamped', () => {
    expect(frameAtX(geometry, -10)).toBe(geometry.frameStart);
    expect(frameAtX(geometry, geometry.width + 10)).toBe(geometry.frameEnd - 1);
    let previous = -1;
    for (let x = 0; x <= geometry.width; x += 48) {
      const frame = frameAtX(geometry, x);
      expect(frame).toBeGreaterThanOrEqual(previous);
      previous = frame;
    }
  });

  it('keyboard stepping moves the cursor one frame and clamps at the range', () => {
    expect(stepCursor(timeline, 100, +1)).toBe(101);
    expect(stepCursor(timeline, 100, -1)).toBe(99);
    expect(stepCursor(timeline, timeline.frame_range[0], -1)).toBe(
      timeline.frame_range[0],
    );
    expect(stepCursor(timeline, timeline.frame_range[1] - 1, +1)).toBe(
      timeline.frame_range[1] - 1,
    );
  });

  it('marks warm-up frames distinctly', () => {
    expect(isWarmup(timeline, 10)).toBe(true);
    expect(isWarmup(timeline, 500)).toBe(false);
  });
});

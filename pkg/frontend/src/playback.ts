/**
 * Fast-forward playback: visit only the frames inside accepted-or-pending
 * events, in order, skipping rejected events and every gap frame.
 */
import type { SmokeEvent } from './schemas.js';
import type { ReviewState } from './state.js';
import { reviewableEventIds } from './state.js';

export function fastForwardFrames(
  events: SmokeEvent[],
  state: ReviewState,
): number[] {
  const frames: number[] = [];
  for (const id of reviewableEventIds(state)) {
    const event = events[id];
    if (!event) {
      continue;
    }
    for (let frame = event.start; frame < event.end; frame += 1) {
      frames.push(frame);
    }
  }
  return frames;
}

/** Stateful iterator used by the playback loop; returns null when done. */
export class FastForwardCursor {
  private readonly frames: number[];
  private position: number;

  constructor(events: SmokeEvent[], state: ReviewState, fromFrame?: number) {
    this.frames = fastForwardFrames(events, state);
    this.position = 0;
    if (fromFrame !== undefined) {
      while (
        this.position < this.frames.length &&
        this.frames[this.position]! < fromFrame
      ) {
        this.position += 1;
      }
    }
  }

  get isEmpty(): boolean {
    return this.frames.length === 0;
  }

  next(): number | null {
    if (this.position >= this.frames.length) {
      return null;
    }
    const frame = this.frames[this.position]!;
    this.position += 1;
    return frame;
  }
}

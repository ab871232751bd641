/**
 * Review-session state: cursor, playback mode, and per-event verdicts.
 * Verdicts persist in browser storage keyed by (day, config hash); stored
 * verdicts from a different config hash are flagged stale, never applied.
 */
import type { SmokeEvent } from './schemas.js';

export type Verdict =
  | 'pending'
  | 'accepted'
  | 'rejected-steam'
  | 'rejected-shadow'
  | 'rejected-other';

export type PlaybackMode = 'stopped' | 'playing' | 'fast_forward';

export interface ReviewState {
  dayId: string;
  configHash: string;
  cursor: number;
  playback: PlaybackMode;
  verdicts: Record<number, Verdict>; // event id -> verdict
}

export interface StoredVerdicts {
  configHash: string;
  verdicts: Record<number, Verdict>;
}

export function initialState(
  dayId: string,
  configHash: string,
  events: SmokeEvent[],
  frameStart: number,
): ReviewState {
  const verdicts: Record<number, Verdict> = {};
  events.forEach((_, id) => {
    verdicts[id] = 'pending';
  });
  return { dayId, configHash, cursor: frameStart, playback: 'stopped', verdicts };
}

export function setVerdict(
  state: ReviewState,
  eventId: number,
  verdict: Verdict,
): ReviewState {
  if (!(eventId in state.verdicts)) {
    throw new Error(`unknown event id ${eventId}`);
  }
  return { ...state, verdicts: { ...state.verdicts, [eventId]: verdict } };
}

export function storageKey(dayId: string, configHash: string): string {
  return `smokescan-verdicts:${dayId}:${configHash}`;
}

/**
 * Restore stored verdicts. A payload recorded under another config hash is
 * reported stale and left unapplied.
 */
export function restoreVerdicts(
  state: ReviewState,
  stored: StoredVerdicts | null,
): { state: ReviewState; stale: boolean } {
  if (!stored) {
    return { state, stale: false };
  }
  if (stored.configHash !== state.configHash) {
    return { state, stale: true };
  }
  const verdicts = { ...state.verdicts };
  for (const [idText, verdict] of Object.entries(stored.verdicts)) {
    const id = Number(idText);
    if (id in verdicts) {
      verdicts[id] = verdict;
    }
  }
  return { state: { ...state, verdicts }, stale: false };
}

export function reviewableEventIds(state: ReviewState): number[] {
  return Object.entries(state.verdicts)
    .filter(([, verdict]) => verdict === 'pending' || verdict === 'accepted')
    .map(([id]) => Number(id))
    .sort((a, b) => a - b);
}

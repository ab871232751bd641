import { describe, expect, it } from 'vitest';

import { initialState, restoreVerdicts, setVerdict, storageKey } from '../src/state';
import type { KeyValueStore } from '../src/storage';
import { loadVerdicts, saveVerdicts, staleVerdictsExist } from '../src/storage';
import { events, manifestLite, timeline } from './fixtures';

class MemoryStore implements KeyValueStore {
  private readonly map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
}

function freshState() {
  return initialState(
    manifestLite.day_id,
    manifestLite.config_hash,
    events,
    timeline.frame_range[0],
  );
}

describe('review state persistence', () => {
  it('verdicts survive a save/load round trip', () => {
    const store = new MemoryStore();
    const state = setVerdict(freshState(), 0, 'accepted');
    saveVerdicts(store, state.dayId, {
      configHash: state.configHash,
      verdicts: state.verdicts,
    });
    const stored = loadVerdicts(store, state.dayId, state.configHash);
    const restored = restoreVerdicts(freshState(), stored);
    expect(restored.stale).toBe(false);
    expect(restored.state.verdicts[0]).toBe('accepted');
  });

  it('verdicts stored under a different config hash are stale, not applied', () => {
    const stored = {
      configHash: 'some-older-config',
      verdicts: { 0: 'accepted' as const },
    };
    const restored = restoreVerdicts(freshState(), stored);
    expect(restored.stale).toBe(true);
    expect(restored.state.verdicts[0]).toBe('pending');
  });

  it('stale detection scans known hashes for this day', () => {
    const store = new MemoryStore();
    store.setItem(storageKey(manifestLite.day_id, 'old-hash'), '{}');
    expect(
      staleVerdictsExist(store, manifestLite.day_id, manifestLite.config_hash, [
        'old-hash',
        manifestLite.config_hash,
      ]),
    ).toBe(true);
  });

  it('corrupt stored payloads are ignored', () => {
    const store = new MemoryStore();
    store.setItem(storageKey(manifestLite.day_id, manifestLite.config_hash), '{oops');
    expect(loadVerdicts(store, manifestLite.day_id, manifestLite.config_hash)).toBeNull();
  });

  it('cursor starts at the first frame of the range', () => {
    expect(freshState().cursor).toBe(timeline.frame_range[0]);
  });
});

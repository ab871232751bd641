/** Verdict persistence behind a minimal store interface (testable without DOM). */
import type { StoredVerdicts } from './state.js';
import { storageKey } from './state.js';

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function saveVerdicts(
  store: KeyValueStore,
  dayId: string,
  payload: StoredVerdicts,
): void {
  store.setItem(storageKey(dayId, payload.configHash), JSON.stringify(payload));
}

export function loadVerdicts(
  store: KeyValueStore,
  dayId: string,
  configHash: string,
): StoredVerdicts | null {
  const raw = store.getItem(storageKey(dayId, configHash));
  if (raw === null) {
    return null;
  }
  try {
    return JSON.parse(raw) as StoredVerdicts;
  } catch {
    return null;
  }
}

/**
 * Find verdicts stored for this day under any other config hash, so the UI
 * can flag them stale without applying them.
 */
export function staleVerdictsExist(
  store: KeyValueStore,
  dayId: string,
  configHash: string,
  knownHashes: string[],
): boolean {
  return knownHashes.some(
    (hash) =>
      hash !== configHash && store.getItem(storageKey(dayId, hash)) !== null,
  );
}

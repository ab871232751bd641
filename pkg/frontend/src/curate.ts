/** Build the curated.json export from verdicts and the clip collection. */
import type { Collection, Curated } from './schemas.js';
import { CuratedSchema } from './schemas.js';
import type { ReviewState } from './state.js';

export function buildCurated(state: ReviewState, collection: Collection): Curated {
  const accepted = collection.clips
    .map((clip, id) => ({ clip, id }))
    .filter(({ id }) => state.verdicts[id] === 'accepted')
    .map(({ clip, id }) => ({
      event_id: id,
      event: clip.event,
      file: clip.file,
      link: clip.link,
    }));
  const curated: Curated = {
    day_id: state.dayId,
    config_hash: state.configHash,
    accepted,
  };
  return CuratedSchema.parse(curated);
}

export function curatedBlob(curated: Curated): string {
  return JSON.stringify(curated, null, 2) + '\n';
}

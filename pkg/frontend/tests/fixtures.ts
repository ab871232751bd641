import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { parseCollection, parseEvents, parseTimeline } from '../src/schemas';

const here = dirname(fileURLToPath(import.meta.url));

export function fixtureJson(name: string): unknown {
  return JSON.parse(readFileSync(join(here, 'fixtures', name), 'utf-8'));
}

export const timeline = parseTimeline(fixtureJson('timeline.json'));
export const events = parseEvents(fixtureJson('events.json'));
export const collection = parseCollection(fixtureJson('collection.json'));
export const manifestLite = fixtureJson('manifest-lite.json') as {
  day_id: string;
  config_hash: string;
};

export const PLUME_SPAN: [number, number] = [400, 520];

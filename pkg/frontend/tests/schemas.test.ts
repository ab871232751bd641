import { describe, expect, it } from 'vitest';

import {
  parseCollection,
  parseCurated,
  parseEvents,
  parseTimeline,
} from '../src/schemas';
import { collection, events, fixtureJson, timeline } from './fixtures';

describe('schema validation of pipeline outputs', () => {
  it('accepts the real timeline.json', () => {
    expect(timeline.day_id).toBeTypeOf('string');
    expect(timeline.polyline.length).toBeLessThanOrEqual(2000);
    expect(timeline.warmup_span).toEqual([0, 60]);
  });

  it('accepts the real events.json', () => {
    expect(events.length).toBeGreaterThan(0);
    for (const event of events) {
      expect(event.start).toBeLessThan(event.end);
    }
  });

  it('accepts the real collection.json', () => {
    expect(collection.clips.length + collection.warnings.length).toBe(events.length);
  });

  it('rejects a timeline with an oversized polyline', () => {
    const raw = fixtureJson('timeline.json') as { polyline: [number, number][] };
    const bad = {
      ...(fixtureJson('timeline.json') as object),
      polyline: Array.from({ length: 2001 }, (_, i) => [i, 0]),
    };
    expect(raw.polyline.length).toBeLessThanOrEqual(2000);
    expect(() => parseTimeline(bad)).toThrow();
  });

  it('rejects events with inverted intervals', () => {
    expect(() => parseEvents([{ start: 10, end: 10, peak_index: 10, peak_value: 1 }])).toThrow();
  });

  it('rejects malformed deep links in collections', () => {
    const bad = JSON.parse(JSON.stringify(fixtureJson('collection.json'))) as {
      clips: { link: string }[];
    };
    if (bad.clips.length > 0) {
      bad.clips[0]!.link = 'https://example.com/not-a-fragment';
      expect(() => parseCollection(bad)).toThrow();
    }
  });

  it('round-trips a curated payload', () => {
    const curated = {
      day_id: 'day',
      config_hash: 'abc',
      accepted: [
        {
          event_id: 0,
          event: { start: 1, end: 5, peak_index: 2, peak_value: 7 },
          file: 'clips/event-000.gif',
          link: '#day=day&frame=2',
        },
      ],
    };
    expect(parseCurated(curated)).toEqual(curated);
  });
});

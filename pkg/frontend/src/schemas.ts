/**
 * Runtime validation of every JSON file the viewer consumes or produces.
 * Mirrors the schema files shipped with the pipeline (schemas/*.schema.json).
 */
import { z } from 'zod';

export const EventSchema = z
  .object({
    start: z.number().int().nonnegative(),
    end: z.number().int().positive(),
    peak_index: z.number().int().nonnegative(),
    peak_value: z.number().int().nonnegative(),
  })
  .refine((e) => e.start < e.end, { message: 'event must have start < end' })
  .refine((e) => e.start <= e.peak_index && e.peak_index < e.end, {
    message: 'peak must lie inside the event',
  });

export type SmokeEvent = z.infer<typeof EventSchema>;

export const EventsFileSchema = z.array(EventSchema);

export const TimelineSchema = z.object({
  day_id: z.string(),
  frame_range: z.tuple([z.number().int().nonnegative(), z.number().int().nonnegative()]),
  warmup_span: z
    .tuple([z.number().int().nonnegative(), z.number().int().nonnegative()])
    .nullable(),
  polyline: z
    .array(z.tuple([z.number().int().nonnegative(), z.number().int().nonnegative()]))
    .max(2000),
  events: z.array(EventSchema),
});

export type Timeline = z.infer<typeof TimelineSchema>;

export const CollectionSchema = z.object({
  day_id: z.string(),
  clips: z.array(
    z.object({
      event: EventSchema,
      file: z.string(),
      frame_stride: z.number().int().positive(),
      link: z.string().regex(/^#day=[^&]*&frame=\d+$/),
    }),
  ),
  warnings: z.array(
    z.object({ event_id: z.number().int().nonnegative(), reason: z.string() }),
  ),
});

export type Collection = z.infer<typeof CollectionSchema>;

export const CuratedSchema = z.object({
  day_id: z.string(),
  config_hash: z.string(),
  accepted: z.array(
    z.object({
      event_id: z.number().int().nonnegative(),
      event: EventSchema,
      file: z.string(),
      link: z.string().regex(/^#day=[^&]*&frame=\d+$/),
    }),
  ),
});

export type Curated = z.infer<typeof CuratedSchema>;

export function parseTimeline(raw: unknown): Timeline {
  return TimelineSchema.parse(raw);
}

export function parseEvents(raw: unknown): SmokeEvent[] {
  return EventsFileSchema.parse(raw);
}

export function parseCollection(raw: unknown): Collection {
  return CollectionSchema.parse(raw);
}

export function parseCurated(raw: unknown): Curated {
  return CuratedSchema.parse(raw);
}

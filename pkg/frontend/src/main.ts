/**
 * Entry point: fetch the run artifacts next to the page, validate them, and
 * boot the viewer. Serve the pipeline output directory (with this app's
 * files copied in, or the run dir passed via ?run=) from any static server.
 */
import { ViewerApp } from './app.js';
import { parseCollection, parseEvents, parseTimeline } from './schemas.js';

function errorBanner(message: string): void {
  const root = document.getElementById('app');
  if (root) {
    root.innerHTML = `<div class="error">failed to load run: ${message}</div>`;
  }
}

async function fetchJson(url: string): Promise<unknown> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new Error(`${url}: HTTP ${response.status}`);
  }
  return response.json();
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const runBase = params.get('run') ?? '.';
  const framesBase = params.get('frames') ?? `${runBase}/frames`;
  try {
    const [timelineRaw, eventsRaw, collectionRaw, manifestRaw] = await Promise.all([
      fetchJson(`${runBase}/timeline.json`),
      fetchJson(`${runBase}/events.json`),
      fetchJson(`${runBase}/collection.json`),
      fetchJson(`${runBase}/manifest.json`),
    ]);
    const timeline = parseTimeline(timelineRaw);
    const events = parseEvents(eventsRaw);
    const collection = parseCollection(collectionRaw);
    const manifest = manifestRaw as { config_hash?: string };
    const root = document.getElementById('app');
    if (!root) {
      throw new Error('missing #app element');
    }
    new ViewerApp(root, {
      timeline,
      events,
      collection,
      configHash: manifest.config_hash ?? 'unknown',
      framesBase,
      store: window.localStorage,
    });
  } catch (error) {
    errorBanner(error instanceof Error ? error.message : String(error));
  }
}

void boot();

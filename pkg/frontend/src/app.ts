/**
 * DOM wiring for the review console. All decision logic lives in the pure
 * modules (timeline, playback, state, curate); this layer draws and routes
 * browser events into them.
 */
import { buildCurated, curatedBlob } from './curate.js';
import { parseViewerLink, viewerLink } from './links.js';
import { FastForwardCursor } from './playback.js';
import type { Collection, SmokeEvent, Timeline } from './schemas.js';
import type { ReviewState, Verdict } from './state.js';
import { initialState, restoreVerdicts, setVerdict } from './state.js';
import type { KeyValueStore } from './storage.js';
import { loadVerdicts, saveVerdicts } from './storage.js';
import type { ChartGeometry } from './timeline.js';
import { isWarmup, seekForClick, stepCursor, xAtFrame } from './timeline.js';

export interface AppDeps {
  timeline: Timeline;
  events: SmokeEvent[];
  collection: Collection;
  configHash: string;
  framesBase: string; // URL prefix for single-frame PNG fetches
  store: KeyValueStore;
  playbackFps?: number;
}

const CHART_HEIGHT = 140;

export class ViewerApp {
  private state: ReviewState;
  private readonly deps: AppDeps;
  private readonly canvas: HTMLCanvasElement;
  private readonly frameImage: HTMLImageElement;
  private readonly statusLine: HTMLElement;
  private ffTimer: number | null = null;

  constructor(root: HTMLElement, deps: AppDeps) {
    this.deps = deps;
    const [frameStart] = deps.timeline.frame_range;
    this.state = initialState(
      deps.timeline.day_id,
      deps.configHash,
      deps.events,
      frameStart,
    );
    const stored = loadVerdicts(deps.store, deps.timeline.day_id, deps.configHash);
    const restored = restoreVerdicts(this.state, stored);
    this.state = restored.state;

    root.innerHTML = `
      <div class="viewer">
        <h1>smokescan review: ${deps.timeline.day_id}</h1>
        <img class="frame" alt="current frame" />
        <canvas class="chart" height="${CHART_HEIGHT}"></canvas>
        <div class="controls">
          <button data-action="back">&#x25C0;</button>
          <button data-action="forward">&#x25B6;</button>
          <button data-action="fast-forward">fast-forward events</button>
          <button data-action="stop">stop</button>
          <button data-action="accept">accept event</button>
          <button data-action="reject-steam">reject: steam</button>
          <button data-action="reject-shadow">reject: shadow</button>
          <button data-action="export">export curated.json</button>
        </div>
        <p class="status"></p>
      </div>`;
    this.canvas = root.querySelector('canvas.chart')!;
    this.frameImage = root.querySelector('img.frame')!;
    this.statusLine = root.querySelector('p.status')!;
    this.canvas.width = this.canvas.clientWidth || 960;

    this.canvas.addEventListener('click', (ev) => this.onChartClick(ev));
    root.querySelectorAll('button[data-action]').forEach((button) => {
      button.addEventListener('click', () =>
        this.onAction((button as HTMLElement).dataset['action']!),
      );
    });
    window.addEventListener('keydown', (ev) => {
      if (ev.key === 'ArrowLeft') this.seek(stepCursor(deps.timeline, this.state.cursor, -1));
      if (ev.key === 'ArrowRight') this.seek(stepCursor(deps.timeline, this.state.cursor, +1));
    });
    window.addEventListener('hashchange', () => this.applyFragment());

    if (restored.stale === false && stored === null) {
      this.setStatus('no stored verdicts for this run');
    }
    this.applyFragment();
    this.render();
  }

  private geometry(): ChartGeometry {
    const [frameStart, frameEnd] = this.deps.timeline.frame_range;
    return { width: this.canvas.width, frameStart, frameEnd };
  }

  private applyFragment(): void {
    try {
      const { frame } = parseViewerLink(window.location.hash);
      this.seek(frame);
    } catch {
      /* no (valid) fragment: keep the current cursor */
    }
  }

  private onChartClick(ev: MouseEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const frame = seekForClick(this.deps.timeline, this.geometry(), ev.clientX - rect.left);
    this.seek(frame);
  }

  private onAction(action: string): void {
    const eventId = this.eventIdAtCursor();
    switch (action) {
      case 'back':
        this.seek(stepCursor(this.deps.timeline, this.state.cursor, -1));
        break;
      case 'forward':
        this.seek(stepCursor(this.deps.timeline, this.state.cursor, +1));
        break;
      case 'fast-forward':
        this.startFastForward();
        break;
      case 'stop':
        this.stopPlayback();
        break;
      case 'accept':
      case 'reject-steam':
      case 'reject-shadow': {
        if (eventId === null) {
          this.setStatus('cursor is not inside an event');
          return;
        }
        const verdict: Verdict =
          action === 'accept' ? 'accepted' : (action as Verdict);
        this.state = setVerdict(this.state, eventId, verdict);
        saveVerdicts(this.deps.store, this.state.dayId, {
          configHash: this.state.configHash,
          verdicts: this.state.verdicts,
        });
        this.setStatus(`event ${eventId}: ${verdict}`);
        this.render();
        break;
      }
      case 'export':
        this.download();
        break;
    }
  }

  private eventIdAtCursor(): number | null {
    const index = this.deps.events.findIndex(
      (e) => this.state.cursor >= e.start && this.state.cursor < e.end,
    );
    return index >= 0 ? index : null;
  }

  private startFastForward(): void {
    const cursor = new FastForwardCursor(this.deps.events, this.state, this.state.cursor);
    if (cursor.isEmpty) {
      this.setStatus('nothing to play: all events rejected');
      return;
    }
    this.stopPlayback();
    this.state = { ...this.state, playback: 'fast_forward' };
    const intervalMs = 1000 / (this.deps.playbackFps ?? 12);
    this.ffTimer = window.setInterval(() => {
      const frame = cursor.next();
      if (frame === null) {
        this.stopPlayback();
        return;
      }
      this.seek(frame);
    }, intervalMs);
  }

  private stopPlayback(): void {
    if (this.ffTimer !== null) {
      window.clearInterval(this.ffTimer);
      this.ffTimer = null;
    }
    this.state = { ...this.state, playback: 'stopped' };
  }

  private seek(frame: number): void {
    this.state = { ...this.state, cursor: frame };
    const padded = String(frame).padStart(5, '0');
    this.frameImage.src = `${this.deps.framesBase}/${padded}.png`;
    history.replaceState(null, '', viewerLink(this.state.dayId, frame));
    this.render();
  }

  private download(): void {
    const curated = buildCurated(this.state, this.deps.collection);
    const blob = new Blob([curatedBlob(curated)], { type: 'application/json' });
    const anchor = document.createElement('a');
    anchor.href = URL.createObjectURL(blob);
    anchor.download = 'curated.json';
    anchor.click();
    URL.revokeObjectURL(anchor.href);
    this.setStatus(`exported ${curated.accepted.length} accepted event(s)`);
  }

  private setStatus(text: string): void {
    this.statusLine.textContent = text;
  }

  private render(): void {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    const { width } = this.canvas;
    const geometry = this.geometry();
    ctx.clearRect(0, 0, width, CHART_HEIGHT);

    if (this.deps.timeline.warmup_span) {
      const [warmStart, warmEnd] = this.deps.timeline.warmup_span;
      const x0 = xAtFrame(geometry, warmStart);
      const x1 = xAtFrame(geometry, warmEnd);
      ctx.fillStyle = '#d9d9d9';
      ctx.fillRect(x0, 0, x1 - x0, CHART_HEIGHT);
    }

    this.deps.events.forEach((event, id) => {
      const verdict = this.state.verdicts[id];
      ctx.fillStyle =
        verdict === 'accepted'
          ? 'rgba(60,160,60,0.35)'
          : verdict === 'pending'
            ? 'rgba(230,160,40,0.35)'
            : 'rgba(160,160,160,0.30)';
      const x0 = xAtFrame(geometry, event.start);
      const x1 = xAtFrame(geometry, event.end);
      ctx.fillRect(x0, 0, x1 - x0, CHART_HEIGHT);
    });

    const peak = Math.max(1, ...this.deps.timeline.polyline.map(([, v]) => v));
    ctx.strokeStyle = '#23527c';
    ctx.beginPath();
    this.deps.timeline.polyline.forEach(([frame, value], i) => {
      const x = xAtFrame(geometry, frame);
      const y = CHART_HEIGHT - (value / peak) * (CHART_HEIGHT - 8) - 4;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();

    const cursorX = xAtFrame(geometry, this.state.cursor);
    ctx.strokeStyle = '#c33';
    ctx.beginPath();
    ctx.moveTo(cursorX, 0);
    ctx.lineTo(cursorX, CHART_HEIGHT);
    ctx.stroke();

    const warm = isWarmup(this.deps.timeline, this.state.cursor) ? ' (warm-up)' : '';
    this.statusLine.dataset['cursor'] = String(this.state.cursor);
    this.setStatus(`frame ${this.state.cursor}${warm}`);
  }
}

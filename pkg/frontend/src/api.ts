/** Thin client for the probe-session service.
 *
 * The console performs no detection of its own: every score and decision it
 * shows comes verbatim from these endpoints.
 */

import { readSse } from './sse.js';
import type { ScoreRecord, SessionInfo, StreamEvent, Verdict } from './types.js';

export interface CreateOptions {
  seed?: number;
  shapes?: string[];
  text?: string;
  overrides?: Record<string, unknown>;
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, '')}${path}`;
  }

  async health(): Promise<boolean> {
    try {
      const r = await fetch(this.url('/healthz'));
      return r.ok;
    } catch {
      return false;
    }
  }

  async createSession(options: CreateOptions = {}): Promise<SessionInfo> {
    const r = await fetch(this.url('/sessions'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(options),
    });
    if (!r.ok) throw new Error(`create session failed: ${r.status} ${await r.text()}`);
    return (await r.json()) as SessionInfo;
  }

  /** Raw PPM bytes of the session's pattern raster. */
  async fetchPatternPpm(sessionId: string, size = 512): Promise<Uint8Array> {
    const r = await fetch(this.url(`/sessions/${sessionId}/pattern?size=${size}`));
    if (!r.ok) throw new Error(`pattern fetch failed: ${r.status}`);
    return new Uint8Array(await r.arrayBuffer());
  }

  async submitFrame(
    sessionId: string,
    frame: Uint8Array,
    contentType: 'image/x-portable-pixmap' | 'image/png',
    landmarksJson?: string,
  ): Promise<ScoreRecord> {
    const form = new FormData();
    const copy = new Uint8Array(frame);
    form.append('frame', new Blob([copy.buffer], { type: contentType }), 'frame');
    if (landmarksJson !== undefined) {
      form.append('landmarks', landmarksJson);
    }
    const r = await fetch(this.url(`/sessions/${sessionId}/frames`), {
      method: 'POST',
      body: form,
    });
    if (!r.ok) throw new Error(`frame rejected: ${r.status} ${await r.text()}`);
    return (await r.json()) as ScoreRecord;
  }

  /** Conclude and return both the parsed verdict and the exact body text
   * (the download feature must be byte-identical to the service response). */
  async conclude(sessionId: string): Promise<{ verdict: Verdict; raw: string }> {
    const r = await fetch(this.url(`/sessions/${sessionId}/conclude`), { method: 'POST' });
    if (!r.ok) throw new Error(`conclude failed: ${r.status} ${await r.text()}`);
    const raw = await r.text();
    return { verdict: JSON.parse(raw) as Verdict, raw };
  }

  async *streamEvents(sessionId: string, signal?: AbortSignal): AsyncGenerator<StreamEvent> {
    for await (const e of readSse(this.url(`/sessions/${sessionId}/events`), signal)) {
      if (e.event === 'score') {
        yield { kind: 'score', record: JSON.parse(e.data) as ScoreRecord };
      } else if (e.event === 'verdict') {
        yield { kind: 'verdict', verdict: JSON.parse(e.data) as Verdict };
        return;
      }
    }
  }
}

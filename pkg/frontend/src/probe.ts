/** Probe session controller: one active session, a capture loop, and the
 * live event stream.  UI-free so tests can drive it with a mock camera. */

import { ServiceClient, CreateOptions } from './api.js';
import type { Camera } from './camera.js';
import { decodePpm, PpmImage } from './ppm.js';
import type { ScoreRecord, SessionInfo, Verdict } from './types.js';

export type ProbeState = 'idle' | 'running' | 'concluded';

export interface ProbeCallbacks {
  onPattern?(image: PpmImage, session: SessionInfo): void;
  onScore?(record: ScoreRecord): void;
  onVerdict?(verdict: Verdict, rawJson: string): void;
  onError?(message: string): void;
  onState?(state: ProbeState): void;
}

export interface ProbeOptions extends CreateOptions {
  /** Capture rate; the median aggregation needs a handful of frames. */
  fps?: number;
  patternSizePx?: number;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class ProbeController {
  state: ProbeState = 'idle';
  session: SessionInfo | null = null;
  framesSent = 0;

  private stopRequested = false;
  private captureDone: Promise<void> = Promise.resolve();
  private streamDone: Promise<void> = Promise.resolve();
  private streamAbort: AbortController | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly camera: Camera,
    private readonly callbacks: ProbeCallbacks = {},
  ) {}

  private setState(state: ProbeState): void {
    this.state = state;
    this.callbacks.onState?.(state);
  }

  /** Create a session, show its pattern, and start capturing.  A second
   * start while running is ignored (single active session). */
  async start(options: ProbeOptions = {}): Promise<SessionInfo | null> {
    if (this.state === 'running') return null;
    const { fps = 5, patternSizePx = 512, ...createOptions } = options;
    try {
      await this.camera.start();
    } catch (err) {
      this.callbacks.onError?.(`camera unavailable: ${String(err)}`);
      return null;
    }
    let session: SessionInfo;
    try {
      session = await this.client.createSession(createOptions);
      const ppm = await this.client.fetchPatternPpm(session.id, patternSizePx);
      this.callbacks.onPattern?.(decodePpm(ppm), session);
    } catch (err) {
      this.camera.stop();
      this.callbacks.onError?.(`service unavailable: ${String(err)}`);
      return null;
    }
    this.session = session;
    this.framesSent = 0;
    this.stopRequested = false;
    this.setState('running');
    this.streamAbort = new AbortController();
    this.streamDone = this.consumeStream(session.id, this.streamAbort.signal);
    this.captureDone = this.captureLoop(session.id, fps);
    return session;
  }

  private async captureLoop(sessionId: string, fps: number): Promise<void> {
    const interval = 1000 / fps;
    while (!this.stopRequested) {
      const frame = await this.camera.grab();
      if (frame === null) break; // mock sources run dry
      try {
        await this.client.submitFrame(sessionId, frame.bytes, frame.contentType, frame.landmarksJson);
        this.framesSent += 1;
      } catch (err) {
        this.callbacks.onError?.(`frame submit failed: ${String(err)}`);
        break;
      }
      if (interval > 0) await sleep(interval);
    }
  }

  private async consumeStream(sessionId: string, signal: AbortSignal): Promise<void> {
    try {
      for await (const event of this.client.streamEvents(sessionId, signal)) {
        if (event.kind === 'score') {
          this.callbacks.onScore?.(event.record);
        }
        // the verdict event also closes the stream server-side
      }
    } catch (err) {
      if (!signal.aborted) this.callbacks.onError?.(`event stream dropped: ${String(err)}`);
    }
  }

  /** Resolves when the frame source runs dry (mock cameras; a live webcam
   * never does, so callers use stopAndConclude instead). */
  waitForCamera(): Promise<void> {
    return this.captureDone;
  }

  /** Stop capturing and fetch the final verdict (requires >= 1 frame). */
  async stopAndConclude(): Promise<Verdict | null> {
    if (this.state !== 'running' || this.session === null) return null;
    this.stopRequested = true;
    await this.captureDone;
    this.camera.stop();
    if (this.framesSent === 0) {
      this.callbacks.onError?.('no frames were submitted; nothing to conclude');
      this.abort();
      return null;
    }
    const { verdict, raw } = await this.client.conclude(this.session.id);
    await this.streamDone; // stream ends after replaying the verdict event
    this.setState('concluded');
    this.callbacks.onVerdict?.(verdict, raw);
    return verdict;
  }

  /** Drop the session without concluding (used by the randomize control). */
  abort(): void {
    this.stopRequested = true;
    this.streamAbort?.abort();
    this.camera.stop();
    this.session = null;
    this.setState('idle');
  }
}

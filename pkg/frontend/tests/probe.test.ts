import { describe, expect, it } from 'vitest';

import type { ServiceClient } from '../src/api.js';
import { MockCamera } from '../src/camera.js';
import { ProbeController } from '../src/probe.js';
import type { ScoreRecord, SessionInfo, Verdict } from '../src/types.js';

const PPM = new TextEncoder().encode('P6\n1 1\n255\n\x00\x00\x00');

function fakeClient(records: ScoreRecord[], verdict: Verdict) {
  let submitted = 0;
  const session: SessionInfo = {
    id: 'abc',
    pattern: { shape: 'diamond', fg: [0, 0, 0], bg: [255, 255, 255], physical_height_cm: 14.5, seed: 1, text: null },
    config: { ncc_threshold: 0.5 },
    pattern_url: '/sessions/abc/pattern',
  };
  const client = {
    baseUrl: 'http://fake',
    async health() {
      return true;
    },
    async createSession() {
      return session;
    },
    async fetchPatternPpm() {
      return PPM;
    },
    async submitFrame() {
      return records[submitted++];
    },
    async conclude() {
      return { verdict, raw: JSON.stringify(verdict) };
    },
    async *streamEvents() {
      for (const record of records) yield { kind: 'score' as const, record };
      yield { kind: 'verdict' as const, verdict };
    },
  };
  return client as unknown as ServiceClient;
}

const record = (index: number, score: number): ScoreRecord => ({
  index,
  decision: score >= 0.5 ? 'Authentic' : 'SuspectedDeepFake',
  best_score: score,
  threshold: 0.5,
  eyes: [],
});

describe('ProbeController', () => {
  it('runs a session end to end and reports scores in order', async () => {
    const records = [record(0, 0.9), record(1, 0.8), record(2, 0.85)];
    const verdict: Verdict = { decision: 'Authentic', best_score: 0.85, threshold: 0.5, eyes: [] };
    const frames = records.map(() => ({ bytes: PPM, contentType: 'image/x-portable-pixmap' as const }));
    const seen: number[] = [];
    let got: Verdict | null = null;
    const controller = new ProbeController(fakeClient(records, verdict), new MockCamera(frames), {
      onScore: (r) => seen.push(r.index),
      onVerdict: (v) => (got = v),
    });
    await controller.start({ fps: 1000 });
    expect(controller.state).toBe('running');
    expect(await controller.start()).toBeNull(); // single active session
    await controller.waitForCamera();
    const final = await controller.stopAndConclude();
    expect(controller.framesSent).toBe(3);
    expect(seen).toEqual([0, 1, 2]);
    expect(final).toEqual(verdict);
    expect(got).toEqual(verdict);
    expect(controller.state).toBe('concluded');
  });

  it('reports a camera failure without creating a session', async () => {
    const broken = {
      async start() {
        throw new Error('denied');
      },
      async grab() {
        return null;
      },
      stop() {},
    };
    const errors: string[] = [];
    const controller = new ProbeController(
      fakeClient([], { decision: 'Inconclusive', best_score: null, threshold: 0.5, eyes: [] }),
      broken,
      { onError: (m) => errors.push(m) },
    );
    expect(await controller.start()).toBeNull();
    expect(controller.state).toBe('idle');
    expect(errors[0]).toMatch(/camera unavailable/);
  });
});

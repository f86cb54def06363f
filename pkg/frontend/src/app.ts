/** DOM wiring for the operator console. */

import { ServiceClient } from './api.js';
import { WebcamCamera } from './camera.js';
import { ScoreChart } from './chart.js';
import { toRgba } from './ppm.js';
import { ProbeController } from './probe.js';
import type { Decision, ScoreRecord, Verdict } from './types.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const serviceInput = $<HTMLInputElement>('service-url');
const thresholdSlider = $<HTMLInputElement>('threshold');
const thresholdLabel = $<HTMLSpanElement>('threshold-label');
const startButton = $<HTMLButtonElement>('start');
const randomizeButton = $<HTMLButtonElement>('randomize');
const concludeButton = $<HTMLButtonElement>('conclude');
const fullscreenButton = $<HTMLButtonElement>('fullscreen');
const banner = $<HTMLDivElement>('banner');
const statusLine = $<HTMLDivElement>('status');
const patternCanvas = $<HTMLCanvasElement>('pattern');
const chartCanvas = $<HTMLCanvasElement>('chart');
const verdictBox = $<HTMLDivElement>('verdict-box');
const verdictText = $<HTMLPreElement>('verdict-text');
const downloadLink = $<HTMLAnchorElement>('download');

const chart = new ScoreChart(chartCanvas, Number(thresholdSlider.value));
chart.draw();

let controller: ProbeController | null = null;
let lastVerdictUrl: string | null = null;

const BANNER_STYLES: Record<Decision, [string, string]> = {
  Authentic: ['#12381f', '#57d993'],
  SuspectedDeepFake: ['#3d1414', '#f26d6d'],
  Inconclusive: ['#3a3312', '#e0c96a'],
};

function showBanner(decision: Decision, score: number | null): void {
  const [bg, fg] = BANNER_STYLES[decision];
  banner.style.background = bg;
  banner.style.color = fg;
  banner.textContent = score === null ? decision : `${decision} - score ${score.toFixed(3)}`;
}

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function onScore(record: ScoreRecord): void {
  chart.addPoint(record.best_score);
  showBanner(record.decision, record.best_score);
  setStatus(`frames: ${record.index + 1}`);
  concludeButton.disabled = false;
}

function onVerdict(verdict: Verdict, rawJson: string): void {
  showBanner(verdict.decision, verdict.best_score);
  verdictText.textContent = JSON.stringify(verdict, null, 2);
  verdictBox.hidden = false;
  if (lastVerdictUrl) URL.revokeObjectURL(lastVerdictUrl);
  // download exactly what the service sent, byte for byte
  lastVerdictUrl = URL.createObjectURL(new Blob([rawJson], { type: 'application/json' }));
  downloadLink.href = lastVerdictUrl;
  setStatus('session concluded');
}

function paintPattern(width: number, height: number, rgba: Uint8ClampedArray<ArrayBuffer>): void {
  patternCanvas.width = width;
  patternCanvas.height = height;
  const ctx = patternCanvas.getContext('2d');
  if (!ctx) return;
  ctx.putImageData(new ImageData(rgba, width, height), 0, 0);
}

async function startProbe(): Promise<void> {
  if (controller && controller.state === 'running') return; // single active session
  verdictBox.hidden = true;
  chart.clear();
  controller = new ProbeController(new ServiceClient(serviceInput.value), new WebcamCamera(), {
    onPattern: (img, session) => {
      paintPattern(img.width, img.height, toRgba(img));
      setStatus(`session ${session.id.slice(0, 8)} - pattern: ${session.pattern.shape}`);
    },
    onScore,
    onVerdict,
    onError: (message) => {
      showBanner('Inconclusive', null);
      setStatus(`error: ${message}`);
      startButton.disabled = false;
    },
    onState: (state) => {
      startButton.disabled = state === 'running';
      concludeButton.disabled = state !== 'running' || (controller?.framesSent ?? 0) === 0;
    },
  });
  const overrides = { ncc_threshold: Number(thresholdSlider.value) };
  await controller.start({ overrides, fps: 5 });
}

startButton.addEventListener('click', () => void startProbe());

randomizeButton.addEventListener('click', () => {
  controller?.abort();
  void startProbe();
});

concludeButton.addEventListener('click', () => {
  concludeButton.disabled = true;
  void controller?.stopAndConclude();
});

fullscreenButton.addEventListener('click', () => {
  void patternCanvas.requestFullscreen();
});

thresholdSlider.addEventListener('input', () => {
  thresholdLabel.textContent = Number(thresholdSlider.value).toFixed(2);
  chart.setThreshold(Number(thresholdSlider.value));
});

thresholdLabel.textContent = Number(thresholdSlider.value).toFixed(2);
setStatus('idle - configure the service URL and press Start probe');

/** Frame sources: the real webcam, and a mock that plays prepared frames. */

export interface CapturedFrame {
  bytes: Uint8Array;
  contentType: 'image/png' | 'image/x-portable-pixmap';
  /** Landmarks JSON to send with the frame; undefined selects the service's
   * demo crop boxes. */
  landmarksJson?: string;
}

export interface Camera {
  start(): Promise<void>;
  /** Next frame, or null when the source is exhausted. */
  grab(): Promise<CapturedFrame | null>;
  stop(): void;
}

export class WebcamCamera implements Camera {
  private stream: MediaStream | null = null;
  private video: HTMLVideoElement;
  private canvas: HTMLCanvasElement;

  constructor(video?: HTMLVideoElement) {
    this.video = video ?? document.createElement('video');
    this.canvas = document.createElement('canvas');
  }

  async start(): Promise<void> {
    this.stream = await navigator.mediaDevices.getUserMedia({
      video: { width: 640, height: 480 },
    });
    this.video.srcObject = this.stream;
    this.video.muted = true;
    await this.video.play();
  }

  async grab(): Promise<CapturedFrame | null> {
    if (!this.stream) return null;
    this.canvas.width = this.video.videoWidth || 640;
    this.canvas.height = this.video.videoHeight || 480;
    const ctx = this.canvas.getContext('2d');
    if (!ctx) throw new Error('canvas 2d context unavailable');
    ctx.drawImage(this.video, 0, 0, this.canvas.width, this.canvas.height);
    const blob: Blob = await new Promise((resolve, reject) =>
      this.canvas.toBlob(
        (b) => (b ? resolve(b) : reject(new Error('frame encode failed'))),
        'image/png',
      ),
    );
    return { bytes: new Uint8Array(await blob.arrayBuffer()), contentType: 'image/png' };
  }

  stop(): void {
    this.stream?.getTracks().forEach((t) => t.stop());
    this.stream = null;
  }
}

/** Plays a fixed list of frames; used by tests and desk demos without a
 * camera. */
export class MockCamera implements Camera {
  private cursor = 0;

  constructor(private readonly frames: CapturedFrame[]) {}

  async start(): Promise<void> {
    this.cursor = 0;
  }

  async grab(): Promise<CapturedFrame | null> {
    if (this.cursor >= this.frames.length) return null;
    return this.frames[this.cursor++];
  }

  stop(): void {
    this.cursor = this.frames.length;
  }
}

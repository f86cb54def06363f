/** Canvas strip chart of per-frame scores with a threshold line. */

export class ScoreChart {
  private scores: (number | null)[] = [];

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private threshold: number,
    private readonly maxPoints = 120,
  ) {}

  setThreshold(t: number): void {
    this.threshold = t;
    this.draw();
  }

  addPoint(score: number | null): void {
    this.scores.push(score);
    if (this.scores.length > this.maxPoints) this.scores.shift();
    this.draw();
  }

  clear(): void {
    this.scores = [];
    this.draw();
  }

  private y(score: number): number {
    const h = this.canvas.height;
    return h - 4 - Math.max(0, Math.min(1, score)) * (h - 8);
  }

  draw(): void {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.fillStyle = '#10141c';
    ctx.fillRect(0, 0, width, height);

    ctx.strokeStyle = '#39465e';
    ctx.setLineDash([5, 4]);
    ctx.beginPath();
    ctx.moveTo(0, this.y(this.threshold));
    ctx.lineTo(width, this.y(this.threshold));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = '#8fa3c4';
    ctx.font = '11px system-ui';
    ctx.fillText(`threshold ${this.threshold.toFixed(2)}`, 6, this.y(this.threshold) - 4);

    const step = width / Math.max(this.scores.length, 20);
    ctx.strokeStyle = '#4cc9f0';
    ctx.lineWidth = 2;
    ctx.beginPath();
    let started = false;
    this.scores.forEach((s, i) => {
      if (s === null) return;
      const x = 4 + i * step;
      if (started) ctx.lineTo(x, this.y(s));
      else ctx.moveTo(x, this.y(s));
      started = true;
    });
    ctx.stroke();
    ctx.lineWidth = 1;

    this.scores.forEach((s, i) => {
      const x = 4 + i * step;
      if (s === null) {
        ctx.fillStyle = '#e0a800';
        ctx.fillRect(x - 2, height - 8, 4, 4); // inconclusive marker
      } else {
        ctx.fillStyle = s >= this.threshold ? '#57d993' : '#f26d6d';
        ctx.fillRect(x - 2, this.y(s) - 2, 4, 4);
      }
    });
  }
}

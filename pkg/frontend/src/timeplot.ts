// Canvas line plot of the displayed series slice. The x axis is sample-index
// space over the current viewport; selections made here are reported as
// index ranges, and index ranges coming back from the linked projection are
// shaded. Null values break the line.

import { PALETTES } from "./scatter.js";

export interface TimeChannel {
  name: string;
  timestamps: number[];
  values: (number | null)[];
}

export interface TimeMapping {
  xForIndex(i: number): number;
  indexForX(x: number): number;
}

const PAD = 12;

// Pure mapping between viewport sample indices and pixels, exported so tests
// can compute exact click coordinates for a target index.
export function timeMapping(
  viewport: [number, number],
  width: number,
): TimeMapping {
  const [start, end] = viewport;
  const span = Math.max(1, end - start);
  const innerW = Math.max(1, width - 2 * PAD);
  return {
    xForIndex: (i) => PAD + ((i - start) / span) * innerW,
    indexForX: (x) => {
      const raw = start + ((x - PAD) / innerW) * span;
      return Math.min(end, Math.max(start, Math.round(raw)));
    },
  };
}

export class TimePlot {
  private channels: TimeChannel[] = [];
  private viewport: [number, number] = [0, 1];
  private shaded: [number, number][] = [];
  private drag: number | null = null;
  onRangeSelect: (start: number, end: number) => void = () => {};

  constructor(readonly canvas: HTMLCanvasElement) {
    canvas.addEventListener("pointerdown", (ev) => {
      this.drag = this.eventX(ev);
    });
    canvas.addEventListener("pointerup", (ev) => {
      if (this.drag === null) {
        return;
      }
      const x0 = this.drag;
      const x1 = this.eventX(ev);
      this.drag = null;
      const mapping = timeMapping(this.viewport, this.canvas.width);
      const a = mapping.indexForX(Math.min(x0, x1));
      const b = mapping.indexForX(Math.max(x0, x1));
      this.onRangeSelect(a, b);
    });
  }

  private eventX(ev: PointerEvent): number {
    return ev.clientX - this.canvas.getBoundingClientRect().left;
  }

  setData(channels: TimeChannel[], viewport: [number, number]): void {
    this.channels = channels;
    this.viewport = viewport;
    this.render();
  }

  setShadedRanges(ranges: [number, number][]): void {
    this.shaded = ranges;
    this.render();
  }

  shadedRanges(): [number, number][] {
    return this.shaded;
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) {
      return; // headless DOM without canvas backing
    }
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#ffffff";
    ctx.fillRect(0, 0, width, height);
    const mapping = timeMapping(this.viewport, width);

    ctx.fillStyle = "rgba(255, 200, 60, 0.35)";
    for (const [a, b] of this.shaded) {
      const xa = mapping.xForIndex(Math.max(a, this.viewport[0]));
      const xb = mapping.xForIndex(Math.min(b, this.viewport[1]));
      if (xb >= xa) {
        ctx.fillRect(xa, 0, Math.max(1, xb - xa), height);
      }
    }

    const colors = PALETTES["classic"]!;
    const bands = Math.max(1, this.channels.length);
    const bandH = (height - 2 * PAD) / bands;
    for (let c = 0; c < this.channels.length; c++) {
      const channel = this.channels[c]!;
      const top = PAD + c * bandH;
      let lo = Infinity;
      let hi = -Infinity;
      for (const v of channel.values) {
        if (v !== null && Number.isFinite(v)) {
          if (v < lo) lo = v;
          if (v > hi) hi = v;
        }
      }
      if (!Number.isFinite(lo)) {
        continue;
      }
      const span = hi - lo || 1;
      const tFirst = channel.timestamps[0] ?? 0;
      const tLast = channel.timestamps[channel.timestamps.length - 1] ?? 1;
      const tSpan = tLast - tFirst || 1;
      const [vs, ve] = this.viewport;
      ctx.strokeStyle = colors[c % colors.length]!;
      ctx.lineWidth = 1;
      ctx.beginPath();
      let pen = false;
      for (let i = 0; i < channel.values.length; i++) {
        const v = channel.values[i];
        if (v === null || !Number.isFinite(v)) {
          pen = false;
          continue;
        }
        // place by timestamp, linearly identified with the viewport index span
        const idx = vs + ((channel.timestamps[i]! - tFirst) / tSpan) * (ve - vs);
        const x = mapping.xForIndex(idx);
        const y = top + bandH - ((v - lo) / span) * (bandH - 4) - 2;
        if (pen) {
          ctx.lineTo(x, y);
        } else {
          ctx.moveTo(x, y);
          pen = true;
        }
      }
      ctx.stroke();
    }
  }
}

// Canvas scatter plot for the 2-D projection. Styling (alpha, point size,
// connecting lines, palette) is applied at draw time from locally held
// settings; a brush gesture reports the selected source indices.

import type { Aesthetics } from "./state.js";

export const PALETTES: Record<string, string[]> = {
  classic: [
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
    "#aa3377", "#bbbbbb", "#714f36", "#2f8f8f", "#d58136",
  ],
  vivid: [
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231",
    "#911eb4", "#46f0f0", "#f032e6", "#bcf60c", "#fabebe",
  ],
  mono: [
    "#1a1a1a", "#404040", "#5c5c5c", "#787878", "#949494",
    "#2b2b2b", "#4e4e4e", "#6a6a6a", "#868686", "#a2a2a2",
  ],
};

export const NOISE_COLOR = "#c4c4c4";

export function colorForLabel(label: number, palette: string): string {
  if (label < 0) {
    return NOISE_COLOR;
  }
  const colors = PALETTES[palette] ?? PALETTES["classic"]!;
  return colors[label % colors.length]!;
}

export interface Rect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface Mapping {
  toX(x: number): number;
  toY(y: number): number;
}

const PAD = 12;

// Pure mapping from data space to pixel space; exported so gesture tests can
// compute exact screen coordinates for a given point.
export function scatterMapping(
  points: [number, number][],
  width: number,
  height: number,
): Mapping {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    if (x < minX) minX = x;
    if (x > maxX) maxX = x;
    if (y < minY) minY = y;
    if (y > maxY) maxY = y;
  }
  if (!Number.isFinite(minX)) {
    minX = 0;
    maxX = 1;
    minY = 0;
    maxY = 1;
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const innerW = Math.max(1, width - 2 * PAD);
  const innerH = Math.max(1, height - 2 * PAD);
  return {
    toX: (x) => PAD + ((x - minX) / spanX) * innerW,
    toY: (y) => height - PAD - ((y - minY) / spanY) * innerH,
  };
}

export function pointsInRect(
  points: [number, number][],
  indices: number[],
  mapping: Mapping,
  rect: Rect,
): number[] {
  const x0 = Math.min(rect.x0, rect.x1);
  const x1 = Math.max(rect.x0, rect.x1);
  const y0 = Math.min(rect.y0, rect.y1);
  const y1 = Math.max(rect.y0, rect.y1);
  const hit: number[] = [];
  for (let i = 0; i < points.length; i++) {
    const px = mapping.toX(points[i]![0]);
    const py = mapping.toY(points[i]![1]);
    if (px >= x0 && px <= x1 && py >= y0 && py <= y1) {
      hit.push(indices[i]!);
    }
  }
  return hit;
}

export class ScatterPlot {
  private points: [number, number][] = [];
  private indices: number[] = [];
  private labels: number[] | null = null;
  private highlighted: Set<number> = new Set();
  private style: Aesthetics = { alpha: 0.8, pointSize: 4, showLines: false, palette: "classic" };
  private drag: { x0: number; y0: number } | null = null;
  onBrush: (indices: number[]) => void = () => {};

  constructor(readonly canvas: HTMLCanvasElement) {
    canvas.addEventListener("pointerdown", (ev) => {
      const p = this.eventPosition(ev);
      this.drag = { x0: p.x, y0: p.y };
    });
    canvas.addEventListener("pointerup", (ev) => {
      if (!this.drag) {
        return;
      }
      const p = this.eventPosition(ev);
      const rect: Rect = { x0: this.drag.x0, y0: this.drag.y0, x1: p.x, y1: p.y };
      this.drag = null;
      const mapping = scatterMapping(this.points, this.canvas.width, this.canvas.height);
      this.onBrush(pointsInRect(this.points, this.indices, mapping, rect));
    });
  }

  private eventPosition(ev: PointerEvent): { x: number; y: number } {
    const bounds = this.canvas.getBoundingClientRect();
    return { x: ev.clientX - bounds.left, y: ev.clientY - bounds.top };
  }

  setData(points: [number, number][], indices: number[], labels: number[] | null): void {
    this.points = points;
    this.indices = indices;
    this.labels = labels;
    this.render();
  }

  setStyle(style: Aesthetics): void {
    this.style = style;
    this.render();
  }

  setHighlight(indices: Iterable<number>): void {
    this.highlighted = new Set(indices);
    this.render();
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
    if (this.points.length === 0) {
      return;
    }
    const mapping = scatterMapping(this.points, width, height);
    const { alpha, pointSize, showLines, palette } = this.style;
    if (showLines) {
      ctx.globalAlpha = Math.min(0.5, alpha);
      ctx.strokeStyle = "#999999";
      ctx.lineWidth = 1;
      ctx.beginPath();
      for (let i = 0; i < this.points.length; i++) {
        const x = mapping.toX(this.points[i]![0]);
        const y = mapping.toY(this.points[i]![1]);
        if (i === 0) {
          ctx.moveTo(x, y);
        } else {
          ctx.lineTo(x, y);
        }
      }
      ctx.stroke();
    }
    ctx.globalAlpha = alpha;
    const radius = Math.max(0.5, pointSize / 2);
    for (let i = 0; i < this.points.length; i++) {
      const x = mapping.toX(this.points[i]![0]);
      const y = mapping.toY(this.points[i]![1]);
      const label = this.labels ? this.labels[i]! : 0;
      ctx.fillStyle = colorForLabel(label, palette);
      ctx.beginPath();
      ctx.arc(x, y, radius, 0, Math.PI * 2);
      ctx.fill();
      if (this.highlighted.has(this.indices[i]!)) {
        ctx.globalAlpha = 1.0;
        ctx.strokeStyle = "#111111";
        ctx.lineWidth = 1.5;
        ctx.beginPath();
        ctx.arc(x, y, radius + 2, 0, Math.PI * 2);
        ctx.stroke();
        ctx.globalAlpha = alpha;
      }
    }
    ctx.globalAlpha = 1.0;
  }

  // Data URL of the canvas as currently styled, or null when the DOM has no
  // canvas backing store.
  imageDataUrl(): string | null {
    try {
      return this.canvas.toDataURL("image/png");
    } catch {
      return null;
    }
  }
}

/** Canvas point cloud with pan, zoom, per-type colors, and dimming of
 * unselected types.
 *
 * Interaction stays under the frame budget on large files by drawing a
 * deterministic stride sample while a gesture is active and scheduling
 * a full-resolution redraw for idle. The stride sample keeps every
 * k-th point, so the sampled picture is stable from frame to frame.
 */

import type { BBox, ParsedPreview } from "./types.js";

export const INTERACTIVE_POINT_BUDGET = 30000;
export const DIM_ALPHA = 0.12;

export interface ViewTransform {
  scale: number;
  tx: number;
  ty: number;
}

/** Smallest stride that brings n under the budget. */
export function decimationStride(n: number, budget: number): number {
  if (n <= budget) return 1;
  return Math.ceil(n / budget);
}

/** Fit the data box into a width x height canvas with padding, y up. */
export function fitTransform(
  bbox: BBox,
  width: number,
  height: number,
  pad = 12,
): ViewTransform {
  const spanX = Math.max(bbox.xmax - bbox.xmin, 1e-12);
  const spanY = Math.max(bbox.ymax - bbox.ymin, 1e-12);
  const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY);
  // center the data; canvas y grows downward, data y grows upward
  const cx = (bbox.xmin + bbox.xmax) / 2;
  const cy = (bbox.ymin + bbox.ymax) / 2;
  return {
    scale,
    tx: width / 2 - scale * cx,
    ty: height / 2 + scale * cy,
  };
}

export function toScreen(t: ViewTransform, x: number, y: number): [number, number] {
  return [t.scale * x + t.tx, -t.scale * y + t.ty];
}

/** Zoom about a fixed screen point (the cursor). */
export function zoomAt(
  t: ViewTransform,
  sx: number,
  sy: number,
  factor: number,
): ViewTransform {
  const scale = t.scale * factor;
  return {
    scale,
    tx: sx - factor * (sx - t.tx),
    ty: sy - factor * (sy - t.ty),
  };
}

export function panBy(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, tx: t.tx + dx, ty: t.ty + dy };
}

export class ScatterView {
  private preview: ParsedPreview | null = null;
  private selected = new Set<string>();
  private transform: ViewTransform = { scale: 1, tx: 0, ty: 0 };
  private dragging = false;
  private lastX = 0;
  private lastY = 0;
  private idleTimer: number | undefined;

  constructor(private canvas: HTMLCanvasElement) {
    canvas.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      this.lastX = e.offsetX;
      this.lastY = e.offsetY;
      canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (!this.dragging) return;
      this.transform = panBy(
        this.transform,
        e.offsetX - this.lastX,
        e.offsetY - this.lastY,
      );
      this.lastX = e.offsetX;
      this.lastY = e.offsetY;
      this.render(true);
      this.scheduleFullRender();
    });
    const stop = () => {
      if (this.dragging) {
        this.dragging = false;
        this.render(false);
      }
    };
    canvas.addEventListener("pointerup", stop);
    canvas.addEventListener("pointercancel", stop);
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      const factor = e.deltaY < 0 ? 1.15 : 1 / 1.15;
      this.transform = zoomAt(this.transform, e.offsetX, e.offsetY, factor);
      this.render(true);
      this.scheduleFullRender();
    }, { passive: false });
  }

  setData(preview: ParsedPreview): void {
    this.preview = preview;
    this.transform = fitTransform(
      preview.bbox,
      this.canvas.width,
      this.canvas.height,
    );
    this.render(false);
  }

  setSelection(selected: Iterable<string>): void {
    this.selected = new Set(selected);
    this.render(false);
  }

  resetView(): void {
    if (this.preview) {
      this.transform = fitTransform(
        this.preview.bbox,
        this.canvas.width,
        this.canvas.height,
      );
    }
    this.render(false);
  }

  private scheduleFullRender(): void {
    if (this.idleTimer !== undefined) clearTimeout(this.idleTimer);
    this.idleTimer = window.setTimeout(() => this.render(false), 150);
  }

  render(interactive: boolean): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    if (!this.preview || this.preview.rowCount === 0) {
      ctx.fillStyle = "#888";
      ctx.font = "14px system-ui, sans-serif";
      ctx.textAlign = "center";
      ctx.fillText("no points to display", width / 2, height / 2);
      return;
    }

    const { coords, typeIndex, types, rowCount } = this.preview;
    const stride = interactive
      ? decimationStride(rowCount, INTERACTIVE_POINT_BUDGET)
      : 1;
    const t = this.transform;
    const size = rowCount > 20000 ? 1.5 : 2.5;
    const noneSelected = this.selected.size === 0;

    // one pass per type keeps fillStyle switches off the hot loop
    for (let ti = 0; ti < types.length; ti++) {
      const info = types[ti];
      const dimmed = !noneSelected && !this.selected.has(info.label);
      ctx.globalAlpha = dimmed ? DIM_ALPHA : 0.85;
      ctx.fillStyle = info.color;
      for (let i = 0; i < rowCount; i += stride) {
        if (typeIndex[i] !== ti) continue;
        const sx = t.scale * coords[2 * i] + t.tx;
        const sy = -t.scale * coords[2 * i + 1] + t.ty;
        if (sx < -4 || sx > width + 4 || sy < -4 || sy > height + 4) continue;
        ctx.fillRect(sx - size / 2, sy - size / 2, size, size);
      }
    }
    ctx.globalAlpha = 1;
  }
}

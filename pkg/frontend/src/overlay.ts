import type { Box } from "./types.js";

/** The slice of CanvasRenderingContext2D the overlay actually uses. */
export interface OverlayContext {
  canvas: { width: number; height: number };
  lineWidth: number;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  measureText(text: string): { width: number };
}

export function clearOverlay(ctx: OverlayContext): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

/**
 * Stroke one display-space rectangle with an optional caption above it.
 * Callers pass display coordinates; no scaling happens here.
 */
export function drawBox(ctx: OverlayContext, box: Box, color: string, caption?: string): void {
  ctx.lineWidth = 2;
  ctx.strokeStyle = color;
  ctx.strokeRect(box.x, box.y, box.w, box.h);
  if (!caption) return;

  ctx.font = "13px system-ui, sans-serif";
  const pad = 4;
  const width = ctx.measureText(caption).width + pad * 2;
  const height = 18;
  // keep the caption inside the canvas when the box touches the top edge
  const top = box.y >= height ? box.y - height : box.y;
  ctx.fillStyle = "rgba(20, 22, 28, 0.85)";
  ctx.fillRect(box.x, top, width, height);
  ctx.fillStyle = "#fff";
  ctx.fillText(caption, box.x + pad, top + height - 5);
}

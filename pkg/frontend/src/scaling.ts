import type { Box } from "./types.js";

/**
 * Coordinate mapping between original-image pixels and display pixels.
 * The server only ever sees image coordinates; the canvas only ever sees
 * display coordinates; these helpers are the single crossing point.
 */

export function displayScale(imageWidth: number, maxDisplayWidth: number): number {
  if (imageWidth <= 0) throw new Error(`image width must be positive, got ${imageWidth}`);
  if (maxDisplayWidth <= 0) throw new Error(`display width must be positive, got ${maxDisplayWidth}`);
  return imageWidth <= maxDisplayWidth ? 1 : maxDisplayWidth / imageWidth;
}

/** Image box -> display box. Exact multiply; the canvas draws subpixels. */
export function toDisplayBox(box: Box, scale: number): Box {
  return {
    x: box.x * scale,
    y: box.y * scale,
    w: box.w * scale,
    h: box.h * scale,
  };
}

/** Display box -> integer image box, for posting to the service. */
export function toImageBox(box: Box, scale: number): Box {
  return {
    x: Math.round(box.x / scale),
    y: Math.round(box.y / scale),
    w: Math.max(1, Math.round(box.w / scale)),
    h: Math.max(1, Math.round(box.h / scale)),
  };
}

/** Any two drag corners -> a normalized box with positive size. */
export function normalizeDrag(x0: number, y0: number, x1: number, y1: number): Box {
  return {
    x: Math.min(x0, x1),
    y: Math.min(y0, y1),
    w: Math.abs(x1 - x0),
    h: Math.abs(y1 - y0),
  };
}

/**
 * Clip a box to the image; null when nothing remains. Mirrors the
 * server-side clamping so what the user sees is what gets stored.
 */
export function clampBoxToImage(box: Box, width: number, height: number): Box | null {
  const x1 = Math.min(Math.max(box.x, 0), width);
  const y1 = Math.min(Math.max(box.y, 0), height);
  const x2 = Math.min(box.x + box.w, width);
  const y2 = Math.min(box.y + box.h, height);
  if (x2 - x1 < 1 || y2 - y1 < 1) return null;
  return { x: x1, y: y1, w: x2 - x1, h: y2 - y1 };
}

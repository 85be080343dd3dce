import { clampBoxToImage } from "./scaling.js";
import type { AnnotationPayload, Box, CueSelection, Draft } from "./types.js";

/** Draft editing is pure data-in data-out so every path is testable. */

export function emptyDraft(): Draft {
  return { box: null, cues: {}, label: null };
}

/** Attach a drawn box (image coordinates), clamped to the image. */
export function withBox(draft: Draft, box: Box, imageWidth: number, imageHeight: number): Draft {
  return { ...draft, box: clampBoxToImage(box, imageWidth, imageHeight) };
}

export function withCue(draft: Draft, dimension: string, value: string): Draft {
  return { ...draft, cues: { ...draft.cues, [dimension]: value } };
}

export function withLabel(draft: Draft, label: string | null): Draft {
  return { ...draft, label };
}

/** Save needs a box; label and cues are optional on the wire. */
export function canSave(draft: Draft): boolean {
  return draft.box !== null && draft.box.w >= 1 && draft.box.h >= 1;
}

export function cuesComplete(cues: Partial<CueSelection>, dimensions: string[]): boolean {
  return dimensions.every((d) => Boolean(cues[d]));
}

/**
 * Wire payload for POST /v1/annotations. Cues are only sent when the
 * checklist is complete; a partial checklist would fail validation.
 */
export function toPayload(
  draft: Draft,
  imageId: string,
  dimensions: string[],
  replaceIndex?: number,
): AnnotationPayload {
  if (!draft.box) throw new Error("draft has no box");
  const payload: AnnotationPayload = {
    image_id: imageId,
    box: [
      Math.round(draft.box.x),
      Math.round(draft.box.y),
      Math.round(draft.box.w),
      Math.round(draft.box.h),
    ],
    label: draft.label,
  };
  payload.cues = cuesComplete(draft.cues, dimensions)
    ? (draft.cues as CueSelection)
    : null;
  if (replaceIndex !== undefined) payload.replace_index = replaceIndex;
  return payload;
}

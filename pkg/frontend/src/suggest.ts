import type { CueSelection, Ethogram } from "./types.js";

/**
 * Suggest a label from a cue checklist using the served profile table.
 * Same rule as the backend matcher: most agreeing dimensions wins, ties
 * resolved by position in the served label order. The UI never invents
 * labels; everything here comes out of the /v1/ethogram payload.
 */
export function suggestLabel(
  cues: Partial<CueSelection>,
  ethogram: Ethogram,
): string | null {
  const dims = Object.keys(ethogram.dimensions);
  // only suggest once the checklist is complete
  for (const dim of dims) {
    if (!cues[dim]) return null;
  }
  let best: string | null = null;
  let bestScore = -1;
  for (const label of ethogram.order) {
    const profile = ethogram.profiles[label];
    if (!profile) continue;
    let score = 0;
    for (const dim of dims) {
      if (profile[dim] === cues[dim]) score += 1;
    }
    if (score > bestScore) {
      best = label;
      bestScore = score;
    }
  }
  return best;
}

/** Labels tied for the best score, in served order; used for a hint. */
export function tiedLabels(
  cues: Partial<CueSelection>,
  ethogram: Ethogram,
): string[] {
  const dims = Object.keys(ethogram.dimensions);
  for (const dim of dims) {
    if (!cues[dim]) return [];
  }
  const scores = ethogram.order.map((label) => {
    const profile = ethogram.profiles[label] ?? {};
    let score = 0;
    for (const dim of dims) {
      if (profile[dim] === cues[dim]) score += 1;
    }
    return score;
  });
  const top = Math.max(...scores);
  return ethogram.order.filter((_, i) => scores[i] === top);
}

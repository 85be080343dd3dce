import type { Ethogram, PredictResult } from "../src/types.js";

/** Mirror of the served /v1/ethogram payload, used by the suggestion tests. */
export const ETHOGRAM: Ethogram = {
  order: ["Alarmed", "Annoyed", "Curious", "Relaxed"],
  dimensions: {
    eyes: ["open_no_sclera", "open_some_sclera", "partially_to_mostly_shut"],
    ears: ["stiff_forward", "stiff_back_pinned", "forward_relaxed", "relaxed_sideways"],
    nose: ["open_nostrils_tense", "closed_nostrils_tense", "open_nostrils_relaxed", "relaxed_all"],
    neck: ["above_parallel", "parallel_or_above", "approx_parallel", "parallel_or_below"],
  },
  profiles: {
    Alarmed: {
      eyes: "open_no_sclera",
      ears: "stiff_forward",
      nose: "open_nostrils_tense",
      neck: "above_parallel",
    },
    Annoyed: {
      eyes: "open_some_sclera",
      ears: "stiff_back_pinned",
      nose: "closed_nostrils_tense",
      neck: "parallel_or_above",
    },
    Curious: {
      eyes: "open_no_sclera",
      ears: "forward_relaxed",
      nose: "open_nostrils_relaxed",
      neck: "approx_parallel",
    },
    Relaxed: {
      eyes: "partially_to_mostly_shut",
      ears: "relaxed_sideways",
      nose: "relaxed_all",
      neck: "parallel_or_below",
    },
  },
};

export const PREDICTION: PredictResult = {
  roi: [32, 17, 120, 96],
  score: 0.91,
  label: "Curious",
  probabilities: [0.03, 0.05, 0.84, 0.08],
  model_versions: { detector: "det-1", classifier: "clf-1" },
};

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

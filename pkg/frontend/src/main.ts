import { ApiClient } from "./api.js";
import {
  canSave,
  cuesComplete,
  emptyDraft,
  toPayload,
  withBox,
  withCue,
  withLabel,
} from "./annotate.js";
import { clearOverlay, drawBox } from "./overlay.js";
import { renderBars } from "./probabilities.js";
import { displayScale, normalizeDrag, toDisplayBox, toImageBox } from "./scaling.js";
import { suggestLabel } from "./suggest.js";
import type { Box, Draft, Ethogram, Mode, PredictResult } from "./types.js";

const MAX_DISPLAY_WIDTH = 720;

interface ViewState {
  mode: Mode;
  image: HTMLImageElement | null;
  file: File | null;
  scale: number;
  overlay: PredictResult | null;
  draft: Draft;
  imageId: string;
  replaceIndex: number | null;
  ethogram: Ethogram | null;
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function setStatus(text: string, tone: "info" | "error" | "ok" = "info"): void {
  const el = byId<HTMLElement>("status");
  el.textContent = text;
  el.dataset.tone = tone;
}

function main(): void {
  const api = new ApiClient("");
  const canvas = byId<HTMLCanvasElement>("canvas");
  const maybeCtx = canvas.getContext("2d");
  if (!maybeCtx) throw new Error("canvas 2d context unavailable");
  const ctx: CanvasRenderingContext2D = maybeCtx;

  const state: ViewState = {
    mode: "predict",
    image: null,
    file: null,
    scale: 1,
    overlay: null,
    draft: emptyDraft(),
    imageId: "",
    replaceIndex: null,
    ethogram: null,
  };

  function redraw(dragBox?: Box): void {
    if (!state.image) return;
    canvas.width = Math.round(state.image.naturalWidth * state.scale);
    canvas.height = Math.round(state.image.naturalHeight * state.scale);
    clearOverlay(ctx);
    ctx.drawImage(state.image, 0, 0, canvas.width, canvas.height);
    if (state.mode === "predict" && state.overlay) {
      const [x, y, w, h] = state.overlay.roi;
      const box = toDisplayBox({ x, y, w, h }, state.scale);
      drawBox(ctx, box, "#4ade80", state.overlay.label);
    }
    if (state.mode === "annotate") {
      if (state.draft.box) {
        drawBox(ctx, toDisplayBox(state.draft.box, state.scale), "#60a5fa",
          state.draft.label ?? undefined);
      }
      if (dragBox) drawBox(ctx, dragBox, "#93c5fd");
    }
  }

  function refreshSuggestion(): void {
    const el = byId<HTMLElement>("suggestion");
    if (!state.ethogram) {
      el.textContent = "";
      return;
    }
    const suggested = suggestLabel(state.draft.cues, state.ethogram);
    el.textContent = suggested ? `suggested label: ${suggested}` : "";
    if (suggested && !state.draft.label) {
      byId<HTMLSelectElement>("label-select").value = suggested;
    }
  }

  function refreshSaveButton(): void {
    byId<HTMLButtonElement>("save").disabled = !canSave(state.draft);
  }

  async function refreshAnnotations(): Promise<void> {
    const list = byId<HTMLUListElement>("annotations");
    list.textContent = "";
    if (!state.imageId) return;
    try {
      const annotations = await api.listAnnotations(state.imageId);
      for (const ann of annotations) {
        const item = document.createElement("li");
        const flag = ann.override ? " [override]" : "";
        item.textContent =
          `#${ann.index} [${ann.box.join(", ")}] ${ann.label ?? "unlabeled"}${flag}`;
        item.addEventListener("click", () => {
          const [x, y, w, h] = ann.box;
          state.draft = {
            box: { x, y, w, h },
            cues: ann.cues ?? {},
            label: ann.label,
          };
          state.replaceIndex = ann.index;
          if (ann.label) byId<HTMLSelectElement>("label-select").value = ann.label;
          refreshSuggestion();
          refreshSaveButton();
          redraw();
        });
        list.appendChild(item);
      }
    } catch (err) {
      setStatus(`could not list annotations: ${String(err)}`, "error");
    }
  }

  function buildChecklist(ethogram: Ethogram): void {
    const holder = byId<HTMLElement>("cues");
    holder.textContent = "";
    for (const [dimension, values] of Object.entries(ethogram.dimensions)) {
      const label = document.createElement("label");
      label.textContent = dimension;
      const select = document.createElement("select");
      select.dataset.dimension = dimension;
      const blank = document.createElement("option");
      blank.value = "";
      blank.textContent = "--";
      select.appendChild(blank);
      for (const value of values) {
        const option = document.createElement("option");
        option.value = value;
        option.textContent = value.replaceAll("_", " ");
        select.appendChild(option);
      }
      select.addEventListener("change", () => {
        state.draft = withCue(state.draft, dimension, select.value);
        refreshSuggestion();
      });
      label.appendChild(select);
      holder.appendChild(label);
    }
    const labelSelect = byId<HTMLSelectElement>("label-select");
    labelSelect.textContent = "";
    for (const name of ["", ...ethogram.order]) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name || "--";
      labelSelect.appendChild(option);
    }
    labelSelect.addEventListener("change", () => {
      state.draft = withLabel(state.draft, labelSelect.value || null);
      redraw();
    });
  }

  byId<HTMLInputElement>("file").addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files && input.files[0];
    if (!file) return;
    state.file = file;
    state.overlay = null;
    state.draft = emptyDraft();
    const image = new Image();
    image.onload = () => {
      state.image = image;
      state.scale = displayScale(image.naturalWidth, MAX_DISPLAY_WIDTH);
      redraw();
      if (state.mode === "predict") void runPredict();
    };
    image.src = URL.createObjectURL(file);
  });

  async function runPredict(): Promise<void> {
    if (!state.file) return;
    // one in-flight predict at a time; the input is re-enabled on settle
    const fileInput = byId<HTMLInputElement>("file");
    fileInput.disabled = true;
    setStatus("predicting...");
    const outcome = await api.predict(state.file, state.file.name);
    fileInput.disabled = false;
    switch (outcome.kind) {
      case "ok":
        state.overlay = outcome.result;
        setStatus(
          `${outcome.result.label} (score ${outcome.result.score.toFixed(3)})`, "ok");
        renderBars(byId("probabilities"), state.ethogram?.order ??
          ["Alarmed", "Annoyed", "Curious", "Relaxed"], outcome.result.probabilities);
        break;
      case "bad-file":
        state.overlay = null;
        setStatus(`bad file: ${outcome.message}`, "error");
        break;
      case "no-horse":
        state.overlay = null;
        setStatus("no horse detected", "error");
        break;
      case "unavailable":
        state.overlay = null;
        setStatus("models unavailable", "error");
        break;
      default:
        state.overlay = null;
        setStatus(outcome.message, "error");
    }
    redraw();
  }

  // drag-to-draw on the canvas (annotate mode)
  let dragStart: { x: number; y: number } | null = null;
  canvas.addEventListener("mousedown", (event) => {
    if (state.mode !== "annotate" || !state.image) return;
    const rect = canvas.getBoundingClientRect();
    dragStart = { x: event.clientX - rect.left, y: event.clientY - rect.top };
  });
  canvas.addEventListener("mousemove", (event) => {
    if (!dragStart) return;
    const rect = canvas.getBoundingClientRect();
    const box = normalizeDrag(dragStart.x, dragStart.y,
      event.clientX - rect.left, event.clientY - rect.top);
    redraw(box);
  });
  canvas.addEventListener("mouseup", (event) => {
    if (!dragStart || !state.image) return;
    const rect = canvas.getBoundingClientRect();
    const display = normalizeDrag(dragStart.x, dragStart.y,
      event.clientX - rect.left, event.clientY - rect.top);
    dragStart = null;
    const imageBox = toImageBox(display, state.scale);
    state.draft = withBox(state.draft, imageBox,
      state.image.naturalWidth, state.image.naturalHeight);
    refreshSaveButton();
    redraw();
  });

  byId<HTMLInputElement>("image-id").addEventListener("change", (event) => {
    state.imageId = (event.target as HTMLInputElement).value.trim();
    state.replaceIndex = null;
    void refreshAnnotations();
  });

  const saveButton = byId<HTMLButtonElement>("save");
  saveButton.addEventListener("click", async () => {
    if (!state.ethogram || !state.imageId) {
      setStatus("enter the manifest image id before saving", "error");
      return;
    }
    const dimensions = Object.keys(state.ethogram.dimensions);
    if (Object.keys(state.draft.cues).length > 0 &&
        !cuesComplete(state.draft.cues, dimensions)) {
      setStatus("fill every cue or none", "error");
      return;
    }
    saveButton.disabled = true;
    try {
      const payload = toPayload(state.draft, state.imageId, dimensions,
        state.replaceIndex ?? undefined);
      const saved = await api.saveAnnotation(payload);
      const banner = byId<HTMLElement>("warning");
      banner.textContent = saved.warning ?? "";
      banner.hidden = !saved.warning;
      setStatus(`saved annotation #${saved.annotation.index}`, "ok");
      state.replaceIndex = null;
      await refreshAnnotations();
    } catch (err) {
      // the draft stays; the user can retry the save
      setStatus(`save failed: ${String(err)}`, "error");
    } finally {
      saveButton.disabled = !canSave(state.draft);
    }
  });

  for (const mode of ["predict", "annotate"] as const) {
    byId<HTMLButtonElement>(`mode-${mode}`).addEventListener("click", () => {
      state.mode = mode;
      byId<HTMLElement>("predict-panel").hidden = mode !== "predict";
      byId<HTMLElement>("annotate-panel").hidden = mode !== "annotate";
      redraw();
    });
  }

  void (async () => {
    try {
      state.ethogram = await api.ethogram();
      buildChecklist(state.ethogram);
    } catch (err) {
      setStatus(`service unreachable: ${String(err)}`, "error");
      return;
    }
    try {
      const health = await api.health();
      setStatus(`service ${health.status}; backend ${health.kernel_backend}`,
        health.status === "ok" ? "ok" : "error");
    } catch {
      setStatus("health check failed", "error");
    }
  })();
}

if (typeof document !== "undefined" && document.getElementById("canvas")) {
  main();
}

import type {
  AnnotationPayload,
  AnnotationWire,
  Ethogram,
  HealthResponse,
  ModelEntry,
  PredictOutcome,
  PredictResult,
  SaveResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (body && typeof body.message === "string") return body.message;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${res.status}`;
}

/**
 * Thin client over the service API. Everything the UI knows about the
 * backend goes through here; no other module touches fetch.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}/v1${path}`;
  }

  async predict(file: Blob, filename = "upload.png"): Promise<PredictOutcome> {
    const form = new FormData();
    form.append("image", file, filename);
    let res: Response;
    try {
      res = await this.fetchFn(this.url("/predict"), { method: "POST", body: form });
    } catch (err) {
      return { kind: "error", message: String(err) };
    }
    if (res.ok) {
      return { kind: "ok", result: (await res.json()) as PredictResult };
    }
    const message = await errorMessage(res);
    // the three documented failure modes each get their own UI state
    if (res.status === 400) return { kind: "bad-file", message };
    if (res.status === 422) return { kind: "no-horse", message };
    if (res.status === 503) return { kind: "unavailable", message };
    return { kind: "error", message };
  }

  async health(): Promise<HealthResponse> {
    const res = await this.fetchFn(this.url("/health"));
    return (await res.json()) as HealthResponse;
  }

  async ethogram(): Promise<Ethogram> {
    const res = await this.fetchFn(this.url("/ethogram"));
    if (!res.ok) throw new Error(await errorMessage(res));
    return (await res.json()) as Ethogram;
  }

  async listModels(): Promise<{ models: ModelEntry[]; active: Record<string, string | null> }> {
    const res = await this.fetchFn(this.url("/models"));
    if (!res.ok) throw new Error(await errorMessage(res));
    return await res.json();
  }

  async listAnnotations(imageId?: string): Promise<AnnotationWire[]> {
    const path = imageId
      ? `/annotations?image_id=${encodeURIComponent(imageId)}`
      : "/annotations";
    const res = await this.fetchFn(this.url(path));
    if (!res.ok) throw new Error(await errorMessage(res));
    const body = await res.json();
    return body.annotations as AnnotationWire[];
  }

  async saveAnnotation(payload: AnnotationPayload): Promise<SaveResponse> {
    const res = await this.fetchFn(this.url("/annotations"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!res.ok) throw new Error(await errorMessage(res));
    return (await res.json()) as SaveResponse;
  }
}

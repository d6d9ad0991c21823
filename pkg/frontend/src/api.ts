/** Typed client for the session service's /v1 HTTP API. */

export interface Hit {
  model_id: number;
  view_index: number;
  similarity: number;
}

export interface AlignmentDoc {
  rotation: number[];
  translation: number[];
  prescale: number;
  error: number;
  iterations: number;
  converged: boolean;
  serialized: string;
}

export interface Metrics {
  sketch_count: number;
  retrieval_count: number;
  last_similarity: number | null;
  last_icp_error: number | null;
}

export interface SessionDoc {
  session_id: string;
  state: "EMPTY" | "CLOUD_LOADED" | "RETRIEVED" | "ALIGNED" | "CONTOUR_READY" | "EXPORTED";
  canvas: [number, number];
  seed: number;
  cloud_points: number | null;
  hits: Hit[];
  selected_model: number | null;
  alignment: AlignmentDoc | null;
  metrics: Metrics;
  history_length: number;
}

export interface ViewDoc {
  width: number;
  height: number;
  points: Array<[number, number]>;
  png_base64: string;
}

export interface ModelInfo {
  model_id: number;
  name: string;
  category: string;
}

export class ApiError extends Error {
  constructor(public status: number, public type: string, message: string,
              public state?: string, public action?: string) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(public baseUrl: string, private fetchFn: FetchLike = fetch) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let type = "HttpError";
      let message = `${resp.status} ${resp.statusText}`;
      let state: string | undefined;
      let action: string | undefined;
      try {
        const doc = await resp.json();
        if (doc?.error) {
          type = doc.error.type ?? type;
          message = doc.error.message ?? message;
          state = doc.error.state;
          action = doc.error.action;
        } else if (doc?.detail) {
          message = JSON.stringify(doc.detail);
        }
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, type, message, state, action);
    }
    return resp;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  createSession(canvasW = 512, canvasH = 512, seed = 0): Promise<SessionDoc> {
    return this.json("/v1/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ canvas_w: canvasW, canvas_h: canvasH, seed }),
    });
  }

  getSession(sid: string): Promise<SessionDoc> {
    return this.json(`/v1/sessions/${sid}`);
  }

  loadCloud(sid: string, text: string): Promise<SessionDoc> {
    return this.json(`/v1/sessions/${sid}/cloud`, {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: text,
    });
  }

  getView(sid: string, dir: [number, number, number], w?: number, h?: number): Promise<ViewDoc> {
    const params = new URLSearchParams({ dx: String(dir[0]), dy: String(dir[1]), dz: String(dir[2]) });
    if (w) params.set("w", String(w));
    if (h) params.set("h", String(h));
    return this.json(`/v1/sessions/${sid}/view?${params}`);
  }

  submitSketch(sid: string, png: Uint8Array): Promise<SessionDoc> {
    return this.json(`/v1/sessions/${sid}/sketch`, {
      method: "POST",
      headers: { "content-type": "image/png" },
      body: png as unknown as BodyInit,
    });
  }

  selectModel(sid: string, modelId: number): Promise<SessionDoc> {
    return this.json(`/v1/sessions/${sid}/select`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ model_id: modelId }),
    });
  }

  async extractContour(sid: string, dir: [number, number, number]): Promise<Uint8Array> {
    const resp = await this.request(`/v1/sessions/${sid}/contour`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ direction: dir }),
    });
    return new Uint8Array(await resp.arrayBuffer());
  }

  exportModel(sid: string): Promise<{ obj: string; metrics: Metrics }> {
    return this.json(`/v1/sessions/${sid}/export`, { method: "POST" });
  }

  listModels(): Promise<{ models: ModelInfo[] }> {
    return this.json("/v1/models");
  }

  thumbnailUrl(modelId: number, viewIndex: number): string {
    return `${this.baseUrl}/v1/models/${modelId}/views/${viewIndex}/contour.png`;
  }
}

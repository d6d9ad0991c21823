/**
 * Headless controller for the modeling loop. The DOM layer delegates every
 * action here, and the scripted end-to-end test drives this class directly,
 * so the tested path and the browser path are the same code.
 *
 * One mutating request is in flight at a time; actions are gated on the
 * session state so the UI can never issue an illegal transition.
 */

import { ApiClient, Hit, SessionDoc } from "./api.js";
import { decodeGrayPng, encodeGrayPng } from "./png.js";
import {
  beginStroke, CanvasState, createState, extendStroke, flatten, inkCount,
  Raster, setBase, Tool, undo,
} from "./raster.js";

export type ViewAngles = { azimuthDeg: number; elevationDeg: number };

export function orbitDirection(view: ViewAngles): [number, number, number] {
  const az = (view.azimuthDeg * Math.PI) / 180;
  const el = (view.elevationDeg * Math.PI) / 180;
  const c = Math.cos(el);
  return [c * Math.cos(az), c * Math.sin(az), Math.sin(el)];
}

export class LoopController {
  canvas: CanvasState;
  session: SessionDoc | null = null;
  view: ViewAngles = { azimuthDeg: 30, elevationDeg: 25 };
  cloudPoints: Array<[number, number]> = [];
  /** exact bytes of the most recent sketch upload (for pixel-equality checks) */
  lastUpload: Uint8Array | null = null;
  busy = false;

  constructor(public api: ApiClient, width = 512, height = 512) {
    this.canvas = createState(width, height);
  }

  private async mutate<T>(fn: () => Promise<T>): Promise<T> {
    if (this.busy) throw new Error("another request is in flight");
    this.busy = true;
    try {
      return await fn();
    } finally {
      this.busy = false;
    }
  }

  get state(): SessionDoc["state"] | "NONE" {
    return this.session?.state ?? "NONE";
  }

  get hits(): Hit[] {
    return this.session?.hits ?? [];
  }

  async init(seed = 0): Promise<SessionDoc> {
    return this.mutate(async () => {
      this.session = await this.api.createSession(this.canvas.width, this.canvas.height, seed);
      return this.session;
    });
  }

  canLoadCloud(): boolean {
    return this.state === "EMPTY" && !this.busy;
  }

  async loadCloud(text: string): Promise<SessionDoc> {
    return this.mutate(async () => {
      this.session = await this.api.loadCloud(this.session!.session_id, text);
      await this.refreshViewInternal();
      return this.session;
    });
  }

  private async refreshViewInternal(): Promise<void> {
    if (!this.session || this.session.cloud_points === null) return;
    const doc = await this.api.getView(this.session.session_id, orbitDirection(this.view),
                                       this.canvas.width, this.canvas.height);
    this.cloudPoints = doc.points;
  }

  /** Orbit to a new angle and refresh the projected cloud. */
  async orbit(view: ViewAngles): Promise<void> {
    this.view = view;
    if (this.session && this.session.cloud_points !== null) {
      await this.refreshViewInternal();
    }
  }

  draw(tool: Tool, points: Array<{ x: number; y: number }>): void {
    if (points.length === 0) return;
    beginStroke(this.canvas, tool, points[0].x, points[0].y);
    for (let i = 1; i < points.length; i++) extendStroke(this.canvas, points[i].x, points[i].y);
  }

  undoStroke(): boolean {
    return undo(this.canvas);
  }

  composite(): Raster {
    return flatten(this.canvas);
  }

  canRetrieve(): boolean {
    return (["EMPTY", "CLOUD_LOADED", "CONTOUR_READY"].includes(this.state)
            && inkCount(this.composite()) > 0 && !this.busy);
  }

  async retrieve(): Promise<Hit[]> {
    if (!["EMPTY", "CLOUD_LOADED", "CONTOUR_READY"].includes(this.state)) {
      throw new Error(`cannot retrieve in state ${this.state}`);
    }
    return this.mutate(async () => {
      const png = encodeGrayPng(this.composite());
      this.lastUpload = png;
      this.session = await this.api.submitSketch(this.session!.session_id, png);
      return this.session.hits;
    });
  }

  canSelect(): boolean {
    return this.state === "RETRIEVED" && this.hits.length > 0 && !this.busy;
  }

  async selectAndAlign(modelId: number): Promise<SessionDoc> {
    if (this.state !== "RETRIEVED") throw new Error(`cannot select in state ${this.state}`);
    return this.mutate(async () => {
      this.session = await this.api.selectModel(this.session!.session_id, modelId);
      return this.session;
    });
  }

  canExtract(): boolean {
    return this.state === "ALIGNED" && !this.busy;
  }

  /** Pulls the aligned model's contour into the canvas as the base layer. */
  async extractContour(): Promise<Raster> {
    if (this.state !== "ALIGNED") throw new Error(`cannot extract in state ${this.state}`);
    return this.mutate(async () => {
      const png = await this.api.extractContour(this.session!.session_id,
                                                orbitDirection(this.view));
      const raster = await decodeGrayPng(png);
      setBase(this.canvas, raster);
      this.session = await this.api.getSession(this.session!.session_id);
      return raster;
    });
  }

  canExport(): boolean {
    return (this.state === "ALIGNED" || this.state === "CONTOUR_READY") && !this.busy;
  }

  async exportModel(): Promise<{ obj: string; metrics: SessionDoc["metrics"] }> {
    if (this.state !== "ALIGNED" && this.state !== "CONTOUR_READY") {
      throw new Error(`cannot export in state ${this.state}`);
    }
    return this.mutate(async () => {
      const out = await this.api.exportModel(this.session!.session_id);
      this.session = await this.api.getSession(this.session!.session_id);
      return out;
    });
  }
}

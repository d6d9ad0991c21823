/**
 * DOM layer: wires the loop controller to a two-layer canvas (projected
 * cloud + axis gizmo below, editable sketch above), tool buttons, orbit
 * sliders, and the retrieval/alignment/export panel.
 */

import { ApiClient } from "./api.js";
import { LoopController, orbitDirection } from "./controller.js";
import { Tool } from "./raster.js";

const CANVAS = 512;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class App {
  controller: LoopController;
  tool: Tool = "brush";
  drawing = false;
  showCloud = true;
  showAxes = true;
  showModel = true;

  constructor(baseUrl: string) {
    this.controller = new LoopController(new ApiClient(baseUrl), CANVAS, CANVAS);
  }

  async start(): Promise<void> {
    await this.controller.init(0);
    this.bind();
    this.render();
    this.setStatus("session ready; load a cloud or start sketching");
  }

  private bind(): void {
    const sketch = el<HTMLCanvasElement>("sketch-layer");
    sketch.addEventListener("pointerdown", (e) => {
      if (this.controller.state === "EXPORTED") return;
      this.drawing = true;
      sketch.setPointerCapture(e.pointerId);
      this.controller.draw(this.tool, [this.canvasPoint(sketch, e)]);
      this.render();
    });
    sketch.addEventListener("pointermove", (e) => {
      if (!this.drawing) return;
      const p = this.canvasPoint(sketch, e);
      this.controller.canvas.strokes.length &&
        this.controller.canvas.strokes[this.controller.canvas.strokes.length - 1]
          .points.push({ x: Math.round(p.x), y: Math.round(p.y) });
      this.render();
    });
    const stop = () => { this.drawing = false; };
    sketch.addEventListener("pointerup", stop);
    sketch.addEventListener("pointercancel", stop);

    el<HTMLButtonElement>("tool-brush").onclick = () => this.setTool("brush");
    el<HTMLButtonElement>("tool-eraser").onclick = () => this.setTool("eraser");
    el<HTMLButtonElement>("undo").onclick = () => {
      this.controller.undoStroke();
      this.render();
    };

    el<HTMLInputElement>("azimuth").oninput = () => void this.orbitChanged();
    el<HTMLInputElement>("elevation").oninput = () => void this.orbitChanged();
    el<HTMLInputElement>("toggle-cloud").onchange = (e) => {
      this.showCloud = (e.target as HTMLInputElement).checked;
      this.render();
    };
    el<HTMLInputElement>("toggle-axes").onchange = (e) => {
      this.showAxes = (e.target as HTMLInputElement).checked;
      this.render();
    };
    el<HTMLInputElement>("toggle-model").onchange = (e) => {
      this.showModel = (e.target as HTMLInputElement).checked;
      this.render();
    };

    el<HTMLInputElement>("cloud-file").onchange = async (e) => {
      const file = (e.target as HTMLInputElement).files?.[0];
      if (!file) return;
      await this.guard(async () => {
        await this.controller.loadCloud(await file.text());
        this.setStatus(`cloud loaded (${this.controller.session?.cloud_points} points)`);
      });
    };

    el<HTMLButtonElement>("retrieve").onclick = () => void this.guard(async () => {
      const hits = await this.controller.retrieve();
      this.renderHits(hits);
      this.setStatus(`retrieved ${hits.length} models`);
    });

    el<HTMLButtonElement>("extract").onclick = () => void this.guard(async () => {
      await this.controller.extractContour();
      this.setStatus("model contour loaded into the canvas; edit and re-retrieve");
    });

    el<HTMLButtonElement>("export").onclick = () => void this.guard(async () => {
      const out = await this.controller.exportModel();
      const blob = new Blob([out.obj], { type: "model/obj" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = "model.obj";
      a.click();
      URL.revokeObjectURL(a.href);
      this.setStatus(`exported after ${out.metrics.sketch_count} sketches`);
    });
  }

  private canvasPoint(canvas: HTMLCanvasElement, e: PointerEvent): { x: number; y: number } {
    const rect = canvas.getBoundingClientRect();
    return {
      x: ((e.clientX - rect.left) / rect.width) * CANVAS,
      y: ((e.clientY - rect.top) / rect.height) * CANVAS,
    };
  }

  private setTool(tool: Tool): void {
    this.tool = tool;
    el("tool-brush").classList.toggle("active", tool === "brush");
    el("tool-eraser").classList.toggle("active", tool === "eraser");
  }

  private async orbitChanged(): Promise<void> {
    const az = Number(el<HTMLInputElement>("azimuth").value);
    const elv = Number(el<HTMLInputElement>("elevation").value);
    await this.controller.orbit({ azimuthDeg: az, elevationDeg: elv });
    this.render();
  }

  private async guard(fn: () => Promise<void>): Promise<void> {
    try {
      await fn();
    } catch (err) {
      this.setStatus(`error: ${(err as Error).message}`);
    }
    this.render();
  }

  private setStatus(text: string): void {
    el("status").textContent = `[${this.controller.state}] ${text}`;
  }

  renderHits(hits: { model_id: number; view_index: number; similarity: number }[]): void {
    const list = el("hits");
    list.innerHTML = "";
    for (const hit of hits) {
      const item = document.createElement("div");
      item.className = "hit";
      const img = document.createElement("img");
      img.src = this.controller.api.thumbnailUrl(hit.model_id, hit.view_index);
      img.width = 72;
      img.height = 72;
      const label = document.createElement("span");
      label.textContent = `model ${hit.model_id} · ${hit.similarity.toPrecision(3)}`;
      item.append(img, label);
      item.onclick = () => void this.guard(async () => {
        const doc = await this.controller.selectAndAlign(hit.model_id);
        const a = doc.alignment;
        if (a === null) {
          this.setStatus(`selected model ${hit.model_id} (no cloud; alignment skipped)`);
        } else {
          const warn = a.converged ? "" : " [did not converge]";
          this.setStatus(`aligned model ${hit.model_id}: error `
                         + `${a.error.toPrecision(3)}${warn}`);
          el("align-info").textContent =
            `ICP error ${a.error.toPrecision(3)}, ${a.iterations} iterations`
            + (a.converged ? "" : " (not converged)");
          el("align-info").classList.toggle("warn", !a.converged);
        }
      });
      list.append(item);
    }
  }

  /** Repaint both layers; the sketch layer is exactly the flattened raster. */
  render(): void {
    const bg = el<HTMLCanvasElement>("cloud-layer").getContext("2d")!;
    bg.clearRect(0, 0, CANVAS, CANVAS);
    if (this.showCloud) {
      bg.fillStyle = "#3b82d0";
      for (const [x, y] of this.controller.cloudPoints) {
        bg.fillRect(Math.round(x) - 1, Math.round(y) - 1, 3, 3);
      }
    }
    if (this.showAxes) this.drawAxisGizmo(bg);

    const fg = el<HTMLCanvasElement>("sketch-layer").getContext("2d")!;
    const raster = this.controller.composite();
    const img = fg.createImageData(CANVAS, CANVAS);
    for (let i = 0; i < raster.data.length; i++) {
      const v = raster.data[i];
      img.data[i * 4] = v;
      img.data[i * 4 + 1] = v;
      img.data[i * 4 + 2] = v;
      img.data[i * 4 + 3] = (!this.showModel && this.controller.canvas.base) || v >= 250 ? 0 : 255;
    }
    fg.putImageData(img, 0, 0);

    el<HTMLButtonElement>("retrieve").toggleAttribute("disabled", !this.controller.canRetrieve());
    el<HTMLButtonElement>("extract").toggleAttribute("disabled", !this.controller.canExtract());
    el<HTMLButtonElement>("export").toggleAttribute("disabled", !this.controller.canExport());
  }

  /** Small orthographic tripod matching the current orbit direction. */
  private drawAxisGizmo(ctx: CanvasRenderingContext2D): void {
    const d = orbitDirection(this.controller.view);
    const fwd = [-d[0], -d[1], -d[2]];
    const seed = Math.abs(d[2]) <= 0.999 ? [0, 0, 1] : [1, 0, 0];
    const dot = seed[0] * fwd[0] + seed[1] * fwd[1] + seed[2] * fwd[2];
    let up = [seed[0] - dot * fwd[0], seed[1] - dot * fwd[1], seed[2] - dot * fwd[2]];
    const n = Math.hypot(up[0], up[1], up[2]);
    up = [up[0] / n, up[1] / n, up[2] / n];
    const right = [up[1] * fwd[2] - up[2] * fwd[1],
                   up[2] * fwd[0] - up[0] * fwd[2],
                   up[0] * fwd[1] - up[1] * fwd[0]];
    const origin = { x: 54, y: CANVAS - 54 };
    const axes: Array<[number[], string, string]> = [
      [[1, 0, 0], "#d04040", "x"], [[0, 1, 0], "#30a030", "y"], [[0, 0, 1], "#4060d0", "z"]];
    ctx.save();
    ctx.lineWidth = 2;
    ctx.font = "12px sans-serif";
    for (const [axis, color, label] of axes) {
      const px = axis[0] * right[0] + axis[1] * right[1] + axis[2] * right[2];
      const py = axis[0] * up[0] + axis[1] * up[1] + axis[2] * up[2];
      ctx.strokeStyle = color;
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.moveTo(origin.x, origin.y);
      ctx.lineTo(origin.x + px * 40, origin.y - py * 40);
      ctx.stroke();
      ctx.fillText(label, origin.x + px * 48 - 3, origin.y - py * 48 + 4);
    }
    ctx.restore();
  }
}

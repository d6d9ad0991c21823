/**
 * Canvas document model: an 8-bit grayscale page (255 = paper, 0 = ink),
 * an optional bitmap base layer (the contour handed back by the server),
 * and an ordered stroke stack on top. Flattening is deterministic, so the
 * uploaded PNG is pixel-identical to what the user sees.
 */

export interface Raster {
  width: number;
  height: number;
  data: Uint8Array; // row-major gray
}

export type Tool = "brush" | "eraser";

export interface Stroke {
  tool: Tool;
  radius: number;
  points: Array<{ x: number; y: number }>;
}

export interface CanvasState {
  width: number;
  height: number;
  base: Raster | null;
  strokes: Stroke[];
}

export const BRUSH_RADIUS = 1.5;
export const ERASER_RADIUS = 6;

export function blankRaster(width: number, height: number): Raster {
  return { width, height, data: new Uint8Array(width * height).fill(255) };
}

export function createState(width: number, height: number): CanvasState {
  return { width, height, base: null, strokes: [] };
}

export function beginStroke(state: CanvasState, tool: Tool, x: number, y: number): Stroke {
  const stroke: Stroke = {
    tool,
    radius: tool === "brush" ? BRUSH_RADIUS : ERASER_RADIUS,
    points: [{ x: Math.round(x), y: Math.round(y) }],
  };
  state.strokes.push(stroke);
  return stroke;
}

export function extendStroke(state: CanvasState, x: number, y: number): void {
  const stroke = state.strokes[state.strokes.length - 1];
  if (stroke) stroke.points.push({ x: Math.round(x), y: Math.round(y) });
}

/** Pops exactly the last stroke; a no-op on an empty stack. */
export function undo(state: CanvasState): boolean {
  return state.strokes.pop() !== undefined;
}

/** Installs a bitmap layer (extracted contour) and clears the stroke stack,
 * so later undos remove only post-load strokes. */
export function setBase(state: CanvasState, base: Raster): void {
  if (base.width !== state.width || base.height !== state.height) {
    throw new Error(
      `base layer ${base.width}x${base.height} does not match canvas ` +
      `${state.width}x${state.height}`);
  }
  state.base = { width: base.width, height: base.height, data: base.data.slice() };
  state.strokes = [];
}

export function clearAll(state: CanvasState): void {
  state.base = null;
  state.strokes = [];
}

function stamp(r: Raster, cx: number, cy: number, radius: number, value: number): void {
  const ri = Math.ceil(radius);
  const r2 = radius * radius;
  for (let dy = -ri; dy <= ri; dy++) {
    const y = cy + dy;
    if (y < 0 || y >= r.height) continue;
    for (let dx = -ri; dx <= ri; dx++) {
      if (dx * dx + dy * dy > r2) continue;
      const x = cx + dx;
      if (x < 0 || x >= r.width) continue;
      r.data[y * r.width + x] = value;
    }
  }
}

function stampLine(r: Raster, x0: number, y0: number, x1: number, y1: number,
                   radius: number, value: number): void {
  // Bresenham walk, stamping the tool footprint at every cell
  let dx = Math.abs(x1 - x0);
  let dy = -Math.abs(y1 - y0);
  const sx = x0 < x1 ? 1 : -1;
  const sy = y0 < y1 ? 1 : -1;
  let err = dx + dy;
  let x = x0;
  let y = y0;
  for (;;) {
    stamp(r, x, y, radius, value);
    if (x === x1 && y === y1) break;
    const e2 = 2 * err;
    if (e2 >= dy) { err += dy; x += sx; }
    if (e2 <= dx) { err += dx; y += sy; }
  }
}

export function applyStroke(r: Raster, stroke: Stroke): void {
  const value = stroke.tool === "brush" ? 0 : 255;
  const pts = stroke.points;
  if (pts.length === 1) {
    stamp(r, pts[0].x, pts[0].y, stroke.radius, value);
    return;
  }
  for (let i = 1; i < pts.length; i++) {
    stampLine(r, pts[i - 1].x, pts[i - 1].y, pts[i].x, pts[i].y, stroke.radius, value);
  }
}

/** Composite base layer + stroke stack into a fresh raster. */
export function flatten(state: CanvasState): Raster {
  const out = blankRaster(state.width, state.height);
  if (state.base) out.data.set(state.base.data);
  for (const stroke of state.strokes) applyStroke(out, stroke);
  return out;
}

export function inkCount(r: Raster): number {
  let n = 0;
  for (let i = 0; i < r.data.length; i++) if (r.data[i] < 128) n++;
  return n;
}

export function rastersEqual(a: Raster, b: Raster): boolean {
  if (a.width !== b.width || a.height !== b.height) return false;
  for (let i = 0; i < a.data.length; i++) if (a.data[i] !== b.data[i]) return false;
  return true;
}

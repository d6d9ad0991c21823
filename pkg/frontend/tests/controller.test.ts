import { describe, expect, it } from "vitest";

import { ApiClient, SessionDoc } from "../src/api.js";
import { LoopController, orbitDirection } from "../src/controller.js";
import { encodeGrayPng } from "../src/png.js";
import { blankRaster } from "../src/raster.js";

function doc(overrides: Partial<SessionDoc>): SessionDoc {
  return {
    session_id: "s1",
    state: "EMPTY",
    canvas: [64, 64],
    seed: 0,
    cloud_points: null,
    hits: [],
    selected_model: null,
    alignment: null,
    metrics: { sketch_count: 0, retrieval_count: 0, last_similarity: null, last_icp_error: null },
    history_length: 1,
    ...overrides,
  };
}

/** ApiClient stub: canned state transitions, no network. */
function stubApi(): ApiClient {
  let state: SessionDoc["state"] = "EMPTY";
  const api = Object.create(ApiClient.prototype) as ApiClient;
  api.createSession = async () => doc({ state });
  api.submitSketch = async () => {
    state = "RETRIEVED";
    return doc({ state, hits: [{ model_id: 0, view_index: 1, similarity: 0.9 }] });
  };
  api.selectModel = async () => {
    state = "ALIGNED";
    return doc({ state, selected_model: 0 });
  };
  api.extractContour = async () => encodeGrayPng(blankRaster(64, 64));
  api.getSession = async () => doc({ state });
  api.exportModel = async () => ({ obj: "v 0 0 0\n", metrics: doc({}).metrics });
  return api;
}

describe("loop controller gating", () => {
  it("retrieve is disabled on a blank canvas", async () => {
    const ctl = new LoopController(stubApi(), 64, 64);
    await ctl.init();
    expect(ctl.canRetrieve()).toBe(false);
    ctl.draw("brush", [{ x: 10, y: 10 }, { x: 40, y: 40 }]);
    expect(ctl.canRetrieve()).toBe(true);
  });

  it("walks the state machine and gates each action", async () => {
    const ctl = new LoopController(stubApi(), 64, 64);
    await ctl.init();
    expect(ctl.canSelect()).toBe(false);
    expect(ctl.canExtract()).toBe(false);
    expect(ctl.canExport()).toBe(false);

    ctl.draw("brush", [{ x: 5, y: 5 }, { x: 50, y: 50 }]);
    await ctl.retrieve();
    expect(ctl.state).toBe("RETRIEVED");
    expect(ctl.canRetrieve()).toBe(false); // must select first
    expect(ctl.canSelect()).toBe(true);

    await ctl.selectAndAlign(0);
    expect(ctl.state).toBe("ALIGNED");
    expect(ctl.canExtract()).toBe(true);
    expect(ctl.canExport()).toBe(true);
    await expect(ctl.retrieve()).rejects.toThrow(/cannot retrieve/);
  });

  it("rejects illegal direct calls", async () => {
    const ctl = new LoopController(stubApi(), 64, 64);
    await ctl.init();
    await expect(ctl.selectAndAlign(0)).rejects.toThrow(/cannot select/);
    await expect(ctl.extractContour()).rejects.toThrow(/cannot extract/);
    await expect(ctl.exportModel()).rejects.toThrow(/cannot export/);
  });

  it("allows one in-flight mutating request at a time", async () => {
    const api = stubApi();
    let release: () => void = () => {};
    const original = api.submitSketch.bind(api);
    api.submitSketch = async (sid, png) => {
      await new Promise<void>((res) => { release = res; });
      return original(sid, png);
    };
    const ctl = new LoopController(api, 64, 64);
    await ctl.init();
    ctl.draw("brush", [{ x: 5, y: 5 }, { x: 50, y: 50 }]);
    const pending = ctl.retrieve();
    await expect(ctl.retrieve()).rejects.toThrow(/in flight/);
    release();
    await pending;
    expect(ctl.state).toBe("RETRIEVED");
  });
});

describe("orbit direction", () => {
  it("produces unit vectors", () => {
    for (const [az, el] of [[0, 0], [90, 45], [-120, -60], [180, 89]]) {
      const d = orbitDirection({ azimuthDeg: az, elevationDeg: el });
      expect(Math.hypot(...d)).toBeCloseTo(1.0, 12);
    }
  });

  it("matches spherical coordinates", () => {
    const d = orbitDirection({ azimuthDeg: 0, elevationDeg: 90 });
    expect(d[2]).toBeCloseTo(1.0, 12);
  });
});

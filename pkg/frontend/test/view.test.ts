import { describe, expect, it } from "vitest";

import { FrameMessage } from "../src/types.js";
import {
  acceptFrame,
  boundingBox,
  fitTransform,
  newViewState,
  screenDeltaToWorld,
  worldToScreen,
} from "../src/view.js";

const UNIT_BOX = { minX: 0, minY: 0, maxX: 1, maxY: 1 };

function frame(overrides: Partial<FrameMessage> = {}): FrameMessage {
  return {
    type: "frame",
    t: 0,
    positions: [[0.5, 0.5]],
    cells: [[[0, 0], [1, 0], [1, 1], [0, 1]]],
    domain: [[0, 0], [1, 0], [1, 1], [0, 1]],
    e_a: 0.1,
    kappa: 1,
    paused: false,
    seq: 0,
    ...overrides,
  };
}

describe("transform", () => {
  it("centers the box and preserves aspect", () => {
    const tr = fitTransform(UNIT_BOX, 800, 600, 20);
    expect(worldToScreen(tr, [0.5, 0.5])).toEqual([400, 300]);
    const [left] = worldToScreen(tr, [0, 0.5]);
    const [right] = worldToScreen(tr, [1, 0.5]);
    const [, top] = worldToScreen(tr, [0.5, 1]);
    const [, bottom] = worldToScreen(tr, [0.5, 0]);
    expect(right - left).toBeCloseTo(bottom - top, 9);
  });

  it("keeps world y up on a y-down screen", () => {
    const tr = fitTransform(UNIT_BOX, 400, 400);
    const [, yLow] = worldToScreen(tr, [0.5, 0.1]);
    const [, yHigh] = worldToScreen(tr, [0.5, 0.9]);
    expect(yHigh).toBeLessThan(yLow);
  });

  it("round-trips screen deltas to world deltas", () => {
    const tr = fitTransform(UNIT_BOX, 640, 480);
    const [wx, wy] = screenDeltaToWorld(tr, 10, -4);
    const [sx0, sy0] = worldToScreen(tr, [0.2, 0.2]);
    const [sx1, sy1] = worldToScreen(tr, [0.2 + wx, 0.2 + wy]);
    expect(sx1 - sx0).toBeCloseTo(10, 9);
    expect(sy1 - sy0).toBeCloseTo(-4, 9);
  });

  it("bounds arbitrary polygons", () => {
    expect(boundingBox([[2, -1], [4, 5], [-3, 0]])).toEqual({
      minX: -3,
      minY: -1,
      maxX: 4,
      maxY: 5,
    });
  });
});

describe("view state", () => {
  it("keeps only the newest frame but every sparkline sample", () => {
    const state = newViewState(600);
    acceptFrame(state, frame({ seq: 1, e_a: 0.5 }));
    acceptFrame(state, frame({ seq: 2, e_a: 0.4 }));
    acceptFrame(state, frame({ seq: 3, e_a: 0.3 }));
    expect(state.latest!.seq).toBe(3);
    expect(state.sparkline.values()).toEqual([0.5, 0.4, 0.3]);
  });
});

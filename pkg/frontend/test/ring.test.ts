import { describe, expect, it } from "vitest";

import { RingBuffer } from "../src/ring.js";

describe("RingBuffer", () => {
  it("keeps only the newest values once full", () => {
    const ring = new RingBuffer(3);
    [1, 2, 3, 4, 5].forEach((v) => ring.push(v));
    expect(ring.values()).toEqual([3, 4, 5]);
    expect(ring.length).toBe(3);
  });

  it("reports values oldest to newest before wrap", () => {
    const ring = new RingBuffer(4);
    ring.push(9);
    ring.push(7);
    expect(ring.values()).toEqual([9, 7]);
  });

  it("tracks the max over the window", () => {
    const ring = new RingBuffer(2);
    ring.push(10);
    ring.push(1);
    expect(ring.max()).toBe(10);
    ring.push(2);
    expect(ring.max()).toBe(2);
  });

  it("rejects nonsense capacities", () => {
    expect(() => new RingBuffer(0)).toThrow();
    expect(() => new RingBuffer(2.5)).toThrow();
  });
});

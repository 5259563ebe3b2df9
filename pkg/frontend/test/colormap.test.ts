import { describe, expect, it } from "vitest";

import { DEFAULT_COLORMAP, divergingColor, parseColor } from "../src/colormap.js";

describe("diverging colormap", () => {
  it("is white at zero and saturates at the endpoints", () => {
    expect(divergingColor(0)).toEqual([255, 255, 255]);
    expect(divergingColor(1)).toEqual(DEFAULT_COLORMAP.positive);
    expect(divergingColor(-1)).toEqual(DEFAULT_COLORMAP.negative);
    expect(divergingColor(2)).toEqual(DEFAULT_COLORMAP.positive); // clamps
  });

  it("positive values are green-dominant, negative red-dominant", () => {
    const pos = divergingColor(0.6);
    const neg = divergingColor(-0.6);
    expect(pos[1]).toBeGreaterThan(pos[0]);
    expect(neg[0]).toBeGreaterThan(neg[1]);
  });

  it("interpolates monotonically toward the endpoint", () => {
    let prev = 256;
    for (const t of [0.2, 0.5, 0.9]) {
      const c = divergingColor(t);
      expect(c[0]).toBeLessThan(prev); // red channel falls toward green
      prev = c[0];
    }
  });

  it("renders NaN as the mask color", () => {
    expect(divergingColor(Number.NaN)).toEqual(DEFAULT_COLORMAP.mask);
  });

  it("accepts custom endpoint colors", () => {
    const custom = { ...DEFAULT_COLORMAP, positive: parseColor("#0000ff") };
    expect(divergingColor(1, custom)).toEqual([0, 0, 255]);
  });

  it("parses hex colors and rejects junk", () => {
    expect(parseColor("10ff20")).toEqual([16, 255, 32]);
    expect(() => parseColor("red")).toThrow();
  });
});

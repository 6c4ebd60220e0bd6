import { describe, expect, it } from "vitest";

import { DEFAULT_STATE, decodeState, encodeState } from "../src/state.js";

describe("exploration state", () => {
  it("round-trips through the URL hash", () => {
    const state = {
      ...DEFAULT_STATE,
      view: "results" as const,
      node: "cameras",
      runs: ["M0", "M1"],
      minFlow: "7",
      highlight: "knit_tops",
    };
    expect(decodeState(encodeState(state))).toEqual(state);
  });

  it("keeps threshold strings exactly as typed", () => {
    const state = { ...DEFAULT_STATE, beta: "0.30", epsilon: "0.0050" };
    const decoded = decodeState(encodeState(state));
    expect(decoded.beta).toBe("0.30"); // not normalized to "0.3"
    expect(decoded.epsilon).toBe("0.0050");
  });

  it("falls back to defaults for unknown hashes", () => {
    expect(decodeState("")).toEqual(DEFAULT_STATE);
    expect(decodeState("#/nonsense")).toEqual(DEFAULT_STATE);
    expect(decodeState("#/comparison").view).toBe("comparison");
  });

  it("omits defaults from the encoded form", () => {
    expect(encodeState(DEFAULT_STATE)).toBe("#/training");
  });
});

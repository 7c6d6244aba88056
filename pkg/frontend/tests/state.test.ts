// Restore semantics and the two-state hover preview contract.

import { describe, expect, it } from "vitest";
import { ViewState } from "../src/state.js";
import type { SessionDocument } from "../src/types.js";

function doc(overrides: Partial<{ current: number; participants: number }> = {}): SessionDocument {
  return {
    version: 1,
    dv_meta: {
      name: "DV",
      unit: "min",
      range_min: 0,
      range_max: 60,
      direction: "lower_is_better",
      variability: 5,
    },
    ivs: [
      { name: "MEDIUM", levels: ["P", "S"] },
      { name: "LAYOUT", levels: ["1", "2"] },
    ],
    design: {
      strategy: "latin_square",
      replications: 1,
      participants: overrides.participants ?? 12,
    },
    mean_tree: {
      axis_iv: "MEDIUM",
      leaves: [
        { condition: ["P", "1"], value: 30, locked: false },
        { condition: ["P", "2"], value: 30, locked: false },
        { condition: ["S", "1"], value: 30, locked: false },
        { condition: ["S", "2"], value: 30, locked: false },
      ],
      group_locks: [false, false],
      grand_locked: false,
    },
    confounds: { fatigue_per_trial: 0, residual_sd: 5 },
    history: {
      current: overrides.current ?? 0,
      nodes: [
        { id: 0, parent: null, marked: false, depth: 0, snapshot: { summary_power: 0.05 } },
        { id: 1, parent: 0, marked: false, depth: 1, snapshot: { summary_power: 0.4 } },
        { id: 2, parent: 1, marked: true, depth: 2, snapshot: { summary_power: 0.7 } },
      ],
    },
    settings: {
      k: 1000,
      alpha: 0.05,
      seed: 0,
      x_lo: 6,
      x_hi: 50,
      tradeoff: { mode: "min_power", pair: null, axis: "participants" },
      pairwise_pairs: [["MEDIUM", "P", "S"]],
    },
  };
}

describe("restore semantics", () => {
  it("keeps the power-view selections across a restore", () => {
    const state = new ViewState();
    state.adopt("abc", doc({ current: 2 }), 0);
    state.setTradeoff("pair", ["MEDIUM", "P", "S"], "replications");

    const restored = doc({ current: 0 });
    state.applyRestore(restored, 3);

    expect(state.doc?.history.current).toBe(0); // all other views restored
    const selection = state.tradeoffSelection();
    expect(selection.mode).toBe("pair");
    expect(selection.pair).toEqual(["MEDIUM", "P", "S"]);
    expect(selection.axis).toBe("replications");
  });

  it("ordinary updates adopt the server's trade-off selection", () => {
    const state = new ViewState();
    state.adopt("abc", doc(), 0);
    const serverDoc = doc();
    serverDoc.settings.tradeoff = {
      mode: "pair",
      pair: ["LAYOUT", "1", "2"],
      axis: "replications",
    };
    state.applyUpdate(serverDoc, 1);
    expect(state.tradeoffSelection().pair).toEqual(["LAYOUT", "1", "2"]);
  });

  it("restore advances the epoch so stale streams get dropped", () => {
    const state = new ViewState();
    state.adopt("abc", doc(), 0);
    state.applyRestore(doc(), 5);
    expect(state.gate.current()).toBe(5);
    expect(state.gate.accepts(0)).toBe(false);
  });
});

describe("hover preview", () => {
  it("renders exactly two states: current plus at most one preview", () => {
    const state = new ViewState();
    state.adopt("abc", doc({ current: 2 }), 0);

    expect(state.previewStates()).toEqual({ current: 2, preview: null });

    state.hover(1);
    expect(state.previewStates()).toEqual({ current: 2, preview: 1 });

    state.hover(0); // a new hover replaces the previous preview, never adds
    expect(state.previewStates()).toEqual({ current: 2, preview: 0 });

    state.hover(null);
    expect(state.previewStates()).toEqual({ current: 2, preview: null });
  });

  it("hovering the current node shows no separate preview", () => {
    const state = new ViewState();
    state.adopt("abc", doc({ current: 2 }), 0);
    state.hover(2);
    expect(state.previewStates()).toEqual({ current: 2, preview: null });
  });

  it("restore clears any active hover preview", () => {
    const state = new ViewState();
    state.adopt("abc", doc({ current: 2 }), 0);
    state.hover(1);
    state.applyRestore(doc({ current: 0 }), 1);
    expect(state.hoveredNode()).toBeNull();
    expect(state.previewStates()).toEqual({ current: 0, preview: null });
  });
});

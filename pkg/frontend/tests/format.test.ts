import { describe, expect, it } from "vitest";
import { cohensDLabel, frameLabel, pairLevels, powerLabel } from "../src/format.js";
import type { DvMetaDto, PairwiseFrameDto } from "../src/types.js";

const dv: DvMetaDto = {
  name: "READINGTIME",
  unit: "min",
  range_min: 0,
  range_max: 60,
  direction: "lower_is_better",
  variability: 5,
};

function frame(meanDiff: number, better: string | null): PairwiseFrameDto {
  return {
    pair: "MEDIUM:SCREEN-PAPER",
    mean_diff: meanDiff,
    ci_lo: meanDiff - 1,
    ci_hi: meanDiff + 1,
    cohens_d: 0.5,
    degenerate: false,
    better_level: better,
  };
}

describe("frameLabel", () => {
  it("absolute mode speaks in 'better by' terms", () => {
    const label = frameLabel(frame(-4, "SCREEN"), dv, "absolute");
    expect(label).toBe("SCREEN is better by about 4 min");
  });

  it("signed mode shows the arithmetic difference", () => {
    const label = frameLabel(frame(-4, "SCREEN"), dv, "signed");
    expect(label).toBe("SCREEN - PAPER = -4 min");
  });

  it("shift-toggled modes disagree exactly on presentation, not magnitude", () => {
    const absolute = frameLabel(frame(-3.5, "SCREEN"), dv, "absolute");
    const signed = frameLabel(frame(-3.5, "SCREEN"), dv, "signed");
    expect(absolute).toContain("3.5");
    expect(signed).toContain("-3.5");
    expect(absolute).not.toContain("-3.5");
  });

  it("zero difference reads as equal", () => {
    expect(frameLabel(frame(0, null), dv, "absolute")).toContain("about equal");
  });
});

describe("pairLevels", () => {
  it("splits iv and levels on the first separators", () => {
    expect(pairLevels("MEDIUM:SCREEN-PAPER")).toEqual({
      iv: "MEDIUM",
      a: "SCREEN",
      b: "PAPER",
    });
  });
});

describe("cohensDLabel", () => {
  it("annotates d", () => {
    expect(cohensDLabel(frame(-4, "SCREEN"))).toBe("d = 0.50");
  });

  it("degenerate intervals read n/a", () => {
    const f = frame(-4, "SCREEN");
    f.degenerate = true;
    f.cohens_d = null;
    expect(cohensDLabel(f)).toBe("d = n/a");
  });
});

describe("powerLabel", () => {
  it("caps the display near one", () => {
    expect(powerLabel(0.9999)).toBe(">0.99");
    expect(powerLabel(0.72)).toBe("0.72");
  });
});

// Labels for the pairwise-difference view.
//
// Default mode reads naturally around absolute values ("S is better by
// about 4 min"); the signed mode shown while Shift is held uses the plain
// arithmetic difference ("S - P = -4 min").

import type { DvMetaDto, PairwiseFrameDto } from "./types.js";
import type { LabelMode } from "./dance.js";

function trim(value: number): string {
  const rounded = Math.abs(value) >= 100 ? value.toFixed(0) : value.toFixed(2);
  return rounded.replace(/\.?0+$/, "") || "0";
}

export function pairLevels(pairLabel: string): { iv: string; a: string; b: string } {
  const colon = pairLabel.indexOf(":");
  const iv = pairLabel.slice(0, colon);
  const rest = pairLabel.slice(colon + 1);
  const dash = rest.indexOf("-");
  return { iv, a: rest.slice(0, dash), b: rest.slice(dash + 1) };
}

export function frameLabel(
  frame: PairwiseFrameDto,
  dv: DvMetaDto,
  mode: LabelMode
): string {
  const { a, b } = pairLevels(frame.pair);
  if (mode === "signed") {
    const sign = frame.mean_diff < 0 ? "-" : "";
    return `${a} - ${b} = ${sign}${trim(Math.abs(frame.mean_diff))} ${dv.unit}`;
  }
  if (frame.better_level === null || frame.mean_diff === 0) {
    return `${a} and ${b} are about equal`;
  }
  return `${frame.better_level} is better by about ${trim(Math.abs(frame.mean_diff))} ${dv.unit}`;
}

export function cohensDLabel(frame: PairwiseFrameDto): string {
  if (frame.degenerate || frame.cohens_d === null) {
    return "d = n/a";
  }
  return `d = ${frame.cohens_d.toFixed(2)}`;
}

export function powerLabel(power: number): string {
  return power >= 0.995 ? ">0.99" : power.toFixed(2);
}

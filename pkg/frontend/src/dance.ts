// Animation controller for the dance of the confidence intervals.
//
// Plays at 2 fps. Arrow keys pause playback and step one frame at a time,
// clamping at both ends. Holding Shift switches the labels from the default
// absolute ("X is better by ...") mode to the signed number line.

import type { PairwiseFrameDto } from "./types.js";

export const DANCE_FPS = 2;
export const FRAME_INTERVAL_MS = 1000 / DANCE_FPS;

export type LabelMode = "absolute" | "signed";

export interface Scheduler {
  setInterval(fn: () => void, ms: number): number;
  clearInterval(id: number): void;
}

const realScheduler: Scheduler = {
  setInterval: (fn, ms) => setInterval(fn, ms) as unknown as number,
  clearInterval: (id) => clearInterval(id),
};

export class DanceController {
  private frames: PairwiseFrameDto[][] = [];
  private index = 0;
  private timer: number | null = null;
  private labelModeValue: LabelMode = "absolute";
  onFrame: (frame: PairwiseFrameDto[], index: number) => void = () => {};
  onLabelMode: (mode: LabelMode) => void = () => {};

  constructor(private scheduler: Scheduler = realScheduler) {}

  setFrames(frames: PairwiseFrameDto[][]): void {
    this.frames = frames;
    this.index = Math.min(this.index, Math.max(0, frames.length - 1));
    this.emit();
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  get frameIndex(): number {
    return this.index;
  }

  get labelMode(): LabelMode {
    return this.labelModeValue;
  }

  currentFrame(): PairwiseFrameDto[] {
    return this.frames[this.index] ?? [];
  }

  play(): void {
    if (this.timer !== null || this.frames.length === 0) {
      return;
    }
    this.timer = this.scheduler.setInterval(() => this.advance(), FRAME_INTERVAL_MS);
  }

  pause(): void {
    if (this.timer !== null) {
      this.scheduler.clearInterval(this.timer);
      this.timer = null;
    }
  }

  toggle(): void {
    this.playing ? this.pause() : this.play();
  }

  private advance(): void {
    if (this.frames.length === 0) {
      return;
    }
    this.index = (this.index + 1) % this.frames.length;
    this.emit();
  }

  /** Arrow-key stepping: pauses and clamps at the ends. */
  stepLeft(): void {
    this.pause();
    this.index = Math.max(0, this.index - 1);
    this.emit();
  }

  stepRight(): void {
    this.pause();
    this.index = Math.min(Math.max(0, this.frames.length - 1), this.index + 1);
    this.emit();
  }

  setShiftHeld(held: boolean): void {
    const next: LabelMode = held ? "signed" : "absolute";
    if (next !== this.labelModeValue) {
      this.labelModeValue = next;
      this.onLabelMode(next);
    }
  }

  handleKey(key: string, down: boolean): void {
    if (key === "Shift") {
      this.setShiftHeld(down);
      return;
    }
    if (!down) {
      return;
    }
    if (key === "ArrowLeft") {
      this.stepLeft();
    } else if (key === "ArrowRight") {
      this.stepRight();
    } else if (key === " ") {
      this.toggle();
    }
  }

  private emit(): void {
    this.onFrame(this.currentFrame(), this.index);
  }
}

// Epoch-gated consumption of the power-curve event stream.
//
// Every server message carries the epoch its computation started under.
// The gate tracks the latest epoch the client has accepted (bumped on every
// committed update), and the consumer silently drops anything older, so a
// stale in-flight stream can never paint a point over fresher results.

import type { CurveMessage, CurvePoint } from "./types.js";

export class EpochGate {
  private epoch = 0;

  current(): number {
    return this.epoch;
  }

  /** Adopt the epoch returned by an accepted update (monotone only). */
  advanceTo(epoch: number): number {
    if (epoch > this.epoch) {
      this.epoch = epoch;
    }
    return this.epoch;
  }

  accepts(messageEpoch: number): boolean {
    return messageEpoch === this.epoch;
  }
}

export class CurveStreamConsumer {
  private points = new Map<number, CurvePoint>();
  private dropped = 0;
  finished = false;
  cancelled = false;

  constructor(private gate: EpochGate) {}

  /** Returns true when the message was accepted, false when dropped as stale. */
  handle(message: CurveMessage): boolean {
    if (!this.gate.accepts(message.epoch)) {
      this.dropped += 1;
      return false;
    }
    if (message.done) {
      this.finished = true;
      this.cancelled = Boolean(message.cancelled);
      return true;
    }
    if (
      message.x === undefined ||
      message.power === undefined ||
      message.tier === undefined
    ) {
      return false;
    }
    // a simulated point replaces its analytic placeholder at the same x
    this.points.set(message.x, {
      x: message.x,
      power: message.power,
      mcStderr: message.mc_stderr ?? 0,
      tier: message.tier,
    });
    return true;
  }

  /** Points to render, ascending x. */
  rendered(): CurvePoint[] {
    return [...this.points.values()].sort((a, b) => a.x - b.x);
  }

  droppedCount(): number {
    return this.dropped;
  }

  reset(): void {
    this.points.clear();
    this.finished = false;
    this.cancelled = false;
  }
}

/** Parse one SSE chunk ("data: {...}\n\n" lines) into messages. */
export function parseSseChunk(chunk: string): CurveMessage[] {
  const messages: CurveMessage[] = [];
  for (const line of chunk.split("\n")) {
    if (line.startsWith("data: ")) {
      messages.push(JSON.parse(line.slice("data: ".length)) as CurveMessage);
    }
  }
  return messages;
}

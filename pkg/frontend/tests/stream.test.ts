// Stale-stream rejection: no rendered curve point may carry an epoch older
// than the latest accepted update, even when messages arrive out of order.

import { describe, expect, it } from "vitest";
import { CurveStreamConsumer, EpochGate, parseSseChunk } from "../src/stream.js";
import type { CurveMessage } from "../src/types.js";

function point(epoch: number, x: number, power: number, tier: "analytic" | "simulated" = "simulated"): CurveMessage {
  return { epoch, x, power, mc_stderr: 0.01, tier };
}

describe("EpochGate", () => {
  it("advances monotonically", () => {
    const gate = new EpochGate();
    expect(gate.current()).toBe(0);
    gate.advanceTo(3);
    expect(gate.current()).toBe(3);
    gate.advanceTo(1); // never regresses
    expect(gate.current()).toBe(3);
  });

  it("accepts only the latest epoch", () => {
    const gate = new EpochGate();
    gate.advanceTo(2);
    expect(gate.accepts(2)).toBe(true);
    expect(gate.accepts(1)).toBe(false);
    expect(gate.accepts(3)).toBe(false);
  });
});

describe("CurveStreamConsumer", () => {
  it("renders accepted points ascending by x", () => {
    const gate = new EpochGate();
    const consumer = new CurveStreamConsumer(gate);
    consumer.handle(point(0, 10, 0.5));
    consumer.handle(point(0, 6, 0.3));
    consumer.handle(point(0, 8, 0.4));
    expect(consumer.rendered().map((p) => p.x)).toEqual([6, 8, 10]);
  });

  it("replaces the analytic placeholder with the simulated point", () => {
    const gate = new EpochGate();
    const consumer = new CurveStreamConsumer(gate);
    consumer.handle(point(0, 6, 0.31, "analytic"));
    consumer.handle(point(0, 7, 0.36, "analytic"));
    consumer.handle(point(0, 6, 0.298, "simulated"));
    const rendered = consumer.rendered();
    expect(rendered).toHaveLength(2);
    expect(rendered[0].tier).toBe("simulated");
    expect(rendered[0].power).toBeCloseTo(0.298);
    expect(rendered[1].tier).toBe("analytic");
  });

  it("drops every point from a superseded stream, in any arrival order", () => {
    const gate = new EpochGate();
    const consumer = new CurveStreamConsumer(gate);
    consumer.handle(point(0, 6, 0.3));
    consumer.handle(point(0, 7, 0.35));

    gate.advanceTo(1); // a fresher update was accepted mid-stream
    consumer.reset();

    // scripted out-of-order delivery: stale messages keep trickling in,
    // interleaved with fresh ones
    const delivery: CurveMessage[] = [
      point(0, 8, 0.4),
      point(1, 6, 0.61),
      point(0, 9, 0.45),
      point(1, 7, 0.66),
      point(0, 10, 0.5),
    ];
    const accepted = delivery.map((m) => consumer.handle(m));
    expect(accepted).toEqual([false, true, false, true, false]);
    const rendered = consumer.rendered();
    expect(rendered.map((p) => p.x)).toEqual([6, 7]);
    expect(rendered.every((p) => p.power > 0.6)).toBe(true); // only fresh values
    expect(consumer.droppedCount()).toBe(3);
  });

  it("records terminal done and cancelled markers of the current epoch only", () => {
    const gate = new EpochGate();
    const consumer = new CurveStreamConsumer(gate);
    gate.advanceTo(2);
    expect(consumer.handle({ epoch: 1, done: true, cancelled: true })).toBe(false);
    expect(consumer.finished).toBe(false);
    expect(consumer.handle({ epoch: 2, done: true, cancelled: false })).toBe(true);
    expect(consumer.finished).toBe(true);
    expect(consumer.cancelled).toBe(false);
  });
});

describe("parseSseChunk", () => {
  it("parses data lines and ignores the rest", () => {
    const chunk =
      'data: {"epoch":0,"tier":"analytic","x":6,"power":0.3,"mc_stderr":0,"done":false}\n\n' +
      ": comment\n\n" +
      'data: {"epoch":0,"done":true,"cancelled":false}\n\n';
    const messages = parseSseChunk(chunk);
    expect(messages).toHaveLength(2);
    expect(messages[0].x).toBe(6);
    expect(messages[1].done).toBe(true);
  });
});

// Expected-averages view: draggable condition bars, group/grand mean lines,
// lock toggles, and radio buttons for the hierarchy axis.

import type { ApiClient } from "../api.js";
import type { ViewState } from "../state.js";
import type { LeafDto } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 420;
const HEIGHT = 260;
const MARGIN = { top: 16, right: 12, bottom: 34, left: 44 };
const DRAG_THROTTLE_MS = 100; // provisional updates capped at 10 per second

export class AveragesView {
  private root: HTMLElement;
  private lastProvisional = 0;

  constructor(
    container: HTMLElement,
    private state: ViewState,
    private api: ApiClient
  ) {
    this.root = document.createElement("div");
    this.root.className = "panel averages";
    container.appendChild(this.root);
    state.onChangeHook(() => this.render());
  }

  render(): void {
    const doc = this.state.doc;
    if (!doc) {
      return;
    }
    this.root.innerHTML = "<h2>Expected averages</h2>";

    const axisRow = document.createElement("div");
    axisRow.className = "axis-row";
    for (const iv of doc.ivs) {
      const label = document.createElement("label");
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = "axis-iv";
      radio.checked = iv.name === doc.mean_tree.axis_iv;
      radio.addEventListener("change", () => {
        void this.api
          .applyUpdate(this.state.sessionId, { op: "switch_axis", iv: iv.name, commit: true })
          .then((r) => this.state.applyUpdate(r.document, r.epoch));
      });
      label.append(radio, ` group by ${iv.name}`);
      axisRow.appendChild(label);
    }
    this.root.appendChild(axisRow);

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("width", String(WIDTH));
    this.root.appendChild(svg);

    const leaves = doc.mean_tree.leaves;
    const lo = doc.dv_meta.range_min;
    const hi = doc.dv_meta.range_max;
    const innerW = WIDTH - MARGIN.left - MARGIN.right;
    const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
    const y = (v: number) => MARGIN.top + innerH * (1 - (v - lo) / (hi - lo));
    const fromY = (py: number) => lo + (1 - (py - MARGIN.top) / innerH) * (hi - lo);
    const barW = (innerW / leaves.length) * 0.62;

    leaves.forEach((leaf, i) => {
      const cx = MARGIN.left + innerW * ((i + 0.5) / leaves.length);
      const bar = document.createElementNS(SVG_NS, "rect");
      bar.setAttribute("x", String(cx - barW / 2));
      bar.setAttribute("y", String(y(leaf.value)));
      bar.setAttribute("width", String(barW));
      bar.setAttribute("height", String(Math.max(1, y(lo) - y(leaf.value))));
      bar.setAttribute("class", `bar hue-${i % 8}${leaf.locked ? " locked" : ""}`);
      this.attachDrag(bar, leaf, fromY);
      svg.appendChild(bar);

      const lock = document.createElementNS(SVG_NS, "text");
      lock.textContent = leaf.locked ? "locked" : "open";
      lock.setAttribute("x", String(cx));
      lock.setAttribute("y", String(HEIGHT - 18));
      lock.setAttribute("class", "lock-toggle");
      lock.setAttribute("text-anchor", "middle");
      lock.addEventListener("click", () => {
        void this.api
          .applyUpdate(this.state.sessionId, {
            op: "toggle_lock",
            node: { kind: "condition", levels: leaf.condition },
          })
          .then((r) => this.state.applyUpdate(r.document, r.epoch));
      });
      svg.appendChild(lock);

      const name = document.createElementNS(SVG_NS, "text");
      name.textContent = leaf.condition.join("/");
      name.setAttribute("x", String(cx));
      name.setAttribute("y", String(HEIGHT - 4));
      name.setAttribute("text-anchor", "middle");
      name.setAttribute("class", "tick");
      svg.appendChild(name);
    });

    const grand = leaves.reduce((acc, l) => acc + l.value, 0) / leaves.length;
    const grandLine = document.createElementNS(SVG_NS, "line");
    grandLine.setAttribute("x1", String(MARGIN.left));
    grandLine.setAttribute("x2", String(WIDTH - MARGIN.right));
    grandLine.setAttribute("y1", String(y(grand)));
    grandLine.setAttribute("y2", String(y(grand)));
    grandLine.setAttribute("class", "grand-line");
    svg.appendChild(grandLine);
    this.attachGrandDrag(grandLine, fromY);
  }

  private attachDrag(bar: SVGRectElement, leaf: LeafDto, fromY: (py: number) => number): void {
    bar.addEventListener("pointerdown", (down) => {
      bar.setPointerCapture(down.pointerId);
      const svgTop = (bar.ownerSVGElement as SVGSVGElement).getBoundingClientRect().top;
      const move = (ev: PointerEvent) => {
        const now = performance.now();
        if (now - this.lastProvisional < DRAG_THROTTLE_MS) {
          return;
        }
        this.lastProvisional = now;
        void this.sendMove(leaf, fromY(ev.clientY - svgTop), false);
      };
      const up = (ev: PointerEvent) => {
        bar.removeEventListener("pointermove", move);
        bar.removeEventListener("pointerup", up);
        void this.sendMove(leaf, fromY(ev.clientY - svgTop), true); // gesture end commits
      };
      bar.addEventListener("pointermove", move);
      bar.addEventListener("pointerup", up);
    });
  }

  private attachGrandDrag(line: SVGLineElement, fromY: (py: number) => number): void {
    line.addEventListener("pointerdown", (down) => {
      line.setPointerCapture(down.pointerId);
      const svgTop = (line.ownerSVGElement as SVGSVGElement).getBoundingClientRect().top;
      const up = (ev: PointerEvent) => {
        line.removeEventListener("pointerup", up);
        void this.api
          .applyUpdate(this.state.sessionId, {
            op: "set_mean",
            node: { kind: "grand" },
            value: fromY(ev.clientY - svgTop),
            commit: true,
          })
          .then((r) => this.state.applyUpdate(r.document, r.epoch))
          .catch((err) => this.flashRejection(err));
      };
      line.addEventListener("pointerup", up);
    });
  }

  private async sendMove(leaf: LeafDto, value: number, commit: boolean): Promise<void> {
    try {
      const r = await this.api.applyUpdate(this.state.sessionId, {
        op: "set_mean",
        node: { kind: "condition", levels: leaf.condition },
        value,
        commit,
      });
      this.state.applyUpdate(r.document, r.epoch);
    } catch (err) {
      this.flashRejection(err); // rejected moves snap back: state untouched
    }
  }

  private flashRejection(err: unknown): void {
    const note = document.createElement("div");
    note.className = "rejection";
    note.textContent =
      err instanceof Error ? `Move rejected: ${err.message}` : "Move rejected by lock constraints";
    this.root.appendChild(note);
    setTimeout(() => note.remove(), 2500);
    this.render(); // snap bars back to the authoritative state
  }
}

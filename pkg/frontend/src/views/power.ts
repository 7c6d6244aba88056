// Power trade-off view: the curve vs. participants or replications, the
// current selection as a dot, an annotation of the fixed quantity at the
// curve's right end, a pair dropdown with a minimum-power option, and a
// warning badge when some other pair has lower power.

import type { ApiClient } from "../api.js";
import { powerLabel } from "../format.js";
import { CurveStreamConsumer } from "../stream.js";
import type { ViewState } from "../state.js";
import type { AxisMode, CurvePoint } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 460;
const HEIGHT = 240;
const MARGIN = { top: 14, right: 70, bottom: 30, left: 40 };

export class PowerView {
  private root: HTMLElement;
  private chart: HTMLElement;
  private badge: HTMLElement;
  readonly consumer: CurveStreamConsumer;
  private previewPoints: CurvePoint[] | null = null;
  private streaming = false;

  constructor(
    container: HTMLElement,
    private state: ViewState,
    private api: ApiClient
  ) {
    this.root = document.createElement("div");
    this.root.className = "panel power";
    this.root.innerHTML = "<h2>Power trade-off</h2>";
    container.appendChild(this.root);
    this.badge = document.createElement("div");
    this.badge.className = "warning-badge hidden";
    this.root.appendChild(this.badge);
    this.chart = document.createElement("div");
    this.root.appendChild(this.chart);
    this.consumer = new CurveStreamConsumer(state.gate);
    state.onChangeHook(() => this.renderControls());
  }

  /** (Re)start the stream for the current parameters. */
  async refresh(): Promise<void> {
    this.consumer.reset();
    if (this.streaming) {
      return; // the running stream ends with a cancelled marker, then we restart
    }
    this.streaming = true;
    try {
      await this.api.streamPowerCurve(this.state.sessionId, (message) => {
        if (this.consumer.handle(message)) {
          this.draw();
        }
      });
    } finally {
      this.streaming = false;
      if (this.consumer.cancelled) {
        void this.refresh(); // superseded: fetch the fresh curve
      }
    }
  }

  setPreviewPoints(points: CurvePoint[] | null): void {
    this.previewPoints = points;
    this.draw();
  }

  private renderControls(): void {
    const doc = this.state.doc;
    if (!doc) {
      return;
    }
    this.root.querySelector(".power-controls")?.remove();
    const controls = document.createElement("div");
    controls.className = "power-controls";

    const pairSelect = document.createElement("select");
    const minOption = document.createElement("option");
    minOption.value = "min_power";
    minOption.textContent = "Minimum power";
    pairSelect.appendChild(minOption);
    for (const iv of doc.ivs) {
      for (let i = 0; i < iv.levels.length; i++) {
        for (let j = i + 1; j < iv.levels.length; j++) {
          const option = document.createElement("option");
          option.value = JSON.stringify([iv.name, iv.levels[i], iv.levels[j]]);
          option.textContent = `${iv.levels[i]} - ${iv.levels[j]}`;
          pairSelect.appendChild(option);
        }
      }
    }
    const selection = this.state.tradeoffSelection();
    pairSelect.value =
      selection.mode === "min_power" || !selection.pair
        ? "min_power"
        : JSON.stringify(selection.pair);

    const axisSelect = document.createElement("select");
    for (const axis of ["participants", "replications"] as AxisMode[]) {
      const option = document.createElement("option");
      option.value = axis;
      option.textContent = `x: ${axis}`;
      axisSelect.appendChild(option);
    }
    axisSelect.value = selection.axis;

    const apply = () => {
      const axis = axisSelect.value as AxisMode;
      if (pairSelect.value === "min_power") {
        this.pushSelection({ op: "select_tradeoff", mode: "min_power", axis });
      } else {
        const [iv, a, b] = JSON.parse(pairSelect.value) as [string, string, string];
        this.pushSelection({
          op: "select_tradeoff",
          mode: "pair",
          pair: { iv, a, b },
          axis,
        });
      }
    };
    pairSelect.addEventListener("change", apply);
    axisSelect.addEventListener("change", apply);
    controls.append(pairSelect, axisSelect);
    this.root.insertBefore(controls, this.chart);
  }

  private pushSelection(update: Record<string, unknown>): void {
    void this.api.applyUpdate(this.state.sessionId, update).then((r) => {
      this.state.applyUpdate(r.document, r.epoch);
      void this.refresh(); // new selection -> new curve stream
    });
  }

  showLowerPowerWarning(pairs: string[]): void {
    if (pairs.length === 0) {
      this.badge.classList.add("hidden");
    } else {
      this.badge.classList.remove("hidden");
      this.badge.textContent = `lower power: ${pairs.join(", ")}`;
    }
  }

  private draw(): void {
    const doc = this.state.doc;
    if (!doc) {
      return;
    }
    const points = this.consumer.rendered();
    this.chart.innerHTML = "";
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("width", String(WIDTH));
    const innerW = WIDTH - MARGIN.left - MARGIN.right;
    const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
    const lo = doc.settings.x_lo;
    const hi = doc.settings.x_hi;
    const x = (v: number) => MARGIN.left + ((v - lo) / Math.max(1, hi - lo)) * innerW;
    const y = (p: number) => MARGIN.top + innerH * (1 - p);

    for (const grid of [0, 0.25, 0.5, 0.75, 1]) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(MARGIN.left));
      line.setAttribute("x2", String(WIDTH - MARGIN.right));
      line.setAttribute("y1", String(y(grid)));
      line.setAttribute("y2", String(y(grid)));
      line.setAttribute("class", "grid-line");
      svg.appendChild(line);
      const tick = document.createElementNS(SVG_NS, "text");
      tick.textContent = grid.toFixed(2);
      tick.setAttribute("x", "4");
      tick.setAttribute("y", String(y(grid) + 4));
      tick.setAttribute("class", "tick");
      svg.appendChild(tick);
    }

    const drawCurve = (pts: CurvePoint[], cls: string) => {
      if (pts.length === 0) {
        return;
      }
      const path = document.createElementNS(SVG_NS, "path");
      const d = pts
        .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.x).toFixed(1)},${y(p.power).toFixed(1)}`)
        .join(" ");
      path.setAttribute("d", d);
      path.setAttribute("class", cls);
      svg.appendChild(path);
    };
    const analytic = points.filter((p) => p.tier === "analytic");
    const simulated = points.filter((p) => p.tier === "simulated");
    drawCurve(analytic, "curve-analytic");
    drawCurve(simulated, "curve-simulated");
    if (this.previewPoints) {
      drawCurve(this.previewPoints, "curve-preview");
    }

    const selection = this.state.tradeoffSelection();
    const currentX =
      selection.axis === "participants" ? doc.design.participants : doc.design.replications;
    const nearest = points.reduce<CurvePoint | null>(
      (best, p) =>
        best === null || Math.abs(p.x - currentX) < Math.abs(best.x - currentX) ? p : best,
      null
    );
    if (nearest) {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(x(nearest.x)));
      dot.setAttribute("cy", String(y(nearest.power)));
      dot.setAttribute("r", "5");
      dot.setAttribute("class", "current-dot");
      svg.appendChild(dot);
    }

    // annotate the fixed quantity of the other axis at the curve's right end
    const last = points[points.length - 1];
    if (last) {
      const note = document.createElementNS(SVG_NS, "text");
      note.textContent =
        selection.axis === "participants"
          ? `r = ${doc.design.replications}, power ${powerLabel(last.power)}`
          : `n = ${doc.design.participants}, power ${powerLabel(last.power)}`;
      note.setAttribute("x", String(x(last.x) + 6));
      note.setAttribute("y", String(y(last.power)));
      note.setAttribute("class", "annotation");
      svg.appendChild(note);
    }
    this.chart.appendChild(svg);
  }
}

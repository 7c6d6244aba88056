// Pairwise-difference view: dot-and-interval chart animated as the dance of
// the CIs, with pair checkboxes, natural-language margins, and a juxtaposed
// orange preview when a history node is hovered.

import type { ApiClient } from "../api.js";
import { DanceController } from "../dance.js";
import { cohensDLabel, frameLabel } from "../format.js";
import type { ViewState } from "../state.js";
import type { PairwiseFrameDto } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 460;
const ROW_H = 44;

export class PairwiseView {
  private root: HTMLElement;
  private chart: HTMLElement;
  readonly dance: DanceController;
  private previewFrame: PairwiseFrameDto[] | null = null;

  constructor(
    container: HTMLElement,
    private state: ViewState,
    private api: ApiClient
  ) {
    this.root = document.createElement("div");
    this.root.className = "panel pairwise";
    this.root.innerHTML = "<h2>Pairwise differences</h2>";
    container.appendChild(this.root);
    this.chart = document.createElement("div");
    this.root.appendChild(this.chart);
    this.dance = new DanceController();
    this.dance.onFrame = () => this.draw();
    this.dance.onLabelMode = () => this.draw();
    window.addEventListener("keydown", (ev) => this.dance.handleKey(ev.key, true));
    window.addEventListener("keyup", (ev) => this.dance.handleKey(ev.key, false));
    state.onChangeHook(() => this.renderControls());
  }

  async refresh(): Promise<void> {
    const frames = await this.api.pairwiseFrames(this.state.sessionId, 30);
    this.dance.setFrames(frames);
    this.dance.play();
  }

  setPreviewFrame(frame: PairwiseFrameDto[] | null): void {
    this.previewFrame = frame;
    this.draw();
  }

  private renderControls(): void {
    const doc = this.state.doc;
    if (!doc) {
      return;
    }
    this.root.querySelector(".pair-checks")?.remove();
    const row = document.createElement("div");
    row.className = "pair-checks";
    const selected = new Set(doc.settings.pairwise_pairs.map((p) => p.join(":")));
    for (const iv of doc.ivs) {
      for (let i = 0; i < iv.levels.length; i++) {
        for (let j = i + 1; j < iv.levels.length; j++) {
          const key = [iv.name, iv.levels[i], iv.levels[j]].join(":");
          const label = document.createElement("label");
          const box = document.createElement("input");
          box.type = "checkbox";
          box.checked = selected.has(key);
          box.addEventListener("change", () => {
            if (box.checked) {
              selected.add(key);
            } else if (selected.size > 1) {
              selected.delete(key);
            } else {
              box.checked = true; // keep at least one pair selected
              return;
            }
            const pairs = [...selected].map((s) => {
              const [piv, a, b] = s.split(":");
              return { iv: piv, a, b };
            });
            void this.api
              .applyUpdate(this.state.sessionId, {
                op: "select_pairwise",
                pairs,
                commit: true,
              })
              .then((r) => {
                this.state.applyUpdate(r.document, r.epoch);
                void this.refresh(); // deselecting a pair re-requests frames
              });
          });
          label.append(box, ` ${iv.levels[i]} - ${iv.levels[j]}`);
          row.appendChild(label);
        }
      }
    }
    this.root.insertBefore(row, this.chart);
  }

  private draw(): void {
    const doc = this.state.doc;
    if (!doc) {
      return;
    }
    const frame = this.dance.currentFrame();
    this.chart.innerHTML = "";
    if (frame.length === 0) {
      return;
    }
    const rows = frame.length;
    const height = rows * ROW_H + 30;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${height}`);
    svg.setAttribute("width", String(WIDTH));

    const magnitudes = frame
      .concat(this.previewFrame ?? [])
      .flatMap((f) => [Math.abs(f.ci_lo), Math.abs(f.ci_hi)]);
    const extent = Math.max(...magnitudes, 1e-9) * 1.15;
    const signed = this.dance.labelMode === "signed";
    const xOf = (v: number) => {
      const t = signed ? v / extent : Math.abs(v) / extent * Math.sign(v);
      return WIDTH / 2 + (t * (WIDTH - 120)) / 2;
    };

    const zero = document.createElementNS(SVG_NS, "line");
    zero.setAttribute("x1", String(WIDTH / 2));
    zero.setAttribute("x2", String(WIDTH / 2));
    zero.setAttribute("y1", "8");
    zero.setAttribute("y2", String(height - 22));
    zero.setAttribute("class", "zero-line");
    svg.appendChild(zero);

    frame.forEach((f, i) => {
      this.drawInterval(svg, f, ROW_H * (i + 0.5), xOf, "current");
      const preview = this.previewFrame?.find((p) => p.pair === f.pair);
      if (preview) {
        this.drawInterval(svg, preview, ROW_H * (i + 0.5) + 12, xOf, "preview");
      }
      const text = document.createElementNS(SVG_NS, "text");
      text.textContent = `${frameLabel(f, doc.dv_meta, this.dance.labelMode)}  (${cohensDLabel(f)})`;
      text.setAttribute("x", "6");
      text.setAttribute("y", String(ROW_H * (i + 0.5) - 12));
      text.setAttribute("class", "margin-label");
      svg.appendChild(text);
    });

    const status = document.createElementNS(SVG_NS, "text");
    status.textContent = `frame ${this.dance.frameIndex + 1} ${
      this.dance.playing ? "(playing at 2 fps)" : "(paused; arrows step)"
    }`;
    status.setAttribute("x", "6");
    status.setAttribute("y", String(height - 8));
    status.setAttribute("class", "tick");
    svg.appendChild(status);
    this.chart.appendChild(svg);
  }

  private drawInterval(
    svg: SVGSVGElement,
    f: PairwiseFrameDto,
    y: number,
    xOf: (v: number) => number,
    cls: "current" | "preview"
  ): void {
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(xOf(f.ci_lo)));
    line.setAttribute("x2", String(xOf(f.ci_hi)));
    line.setAttribute("y1", String(y));
    line.setAttribute("y2", String(y));
    line.setAttribute("class", `ci-${cls}`);
    svg.appendChild(line);
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(xOf(f.mean_diff)));
    dot.setAttribute("cy", String(y));
    dot.setAttribute("r", "4");
    dot.setAttribute("class", `dot-${cls}`);
    svg.appendChild(dot);
  }
}

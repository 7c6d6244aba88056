// History view: the exploration tree with depth on x and power on y.
// Clicking a node restores it (keeping the power-view selections); hovering
// previews the hovered node in orange next to the current node. Marked
// nodes get a concentric outline.

import type { ApiClient } from "../api.js";
import type { ViewState } from "../state.js";
import type { HistoryNodeDto } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 460;
const HEIGHT = 180;
const MARGIN = { top: 14, right: 16, bottom: 20, left: 40 };

export class HistoryView {
  private root: HTMLElement;
  onRestored: () => void = () => {};
  onHover: (nodeId: number | null) => void = () => {};

  constructor(
    container: HTMLElement,
    private state: ViewState,
    private api: ApiClient
  ) {
    this.root = document.createElement("div");
    this.root.className = "panel history";
    container.appendChild(this.root);
    state.onChangeHook(() => this.render());
  }

  render(): void {
    const doc = this.state.doc;
    if (!doc) {
      return;
    }
    this.root.innerHTML = "<h2>History</h2>";
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("width", String(WIDTH));
    this.root.appendChild(svg);

    const nodes = doc.history.nodes;
    const byId = new Map(nodes.map((n) => [n.id, n]));
    const maxDepth = Math.max(1, ...nodes.map((n) => n.depth));
    const innerW = WIDTH - MARGIN.left - MARGIN.right;
    const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
    const x = (n: HistoryNodeDto) => MARGIN.left + (n.depth / maxDepth) * innerW;
    const y = (n: HistoryNodeDto) =>
      MARGIN.top + innerH * (1 - Math.min(1, Math.max(0, n.snapshot.summary_power)));

    const preview = this.state.previewStates();
    for (const node of nodes) {
      if (node.parent === null) {
        continue;
      }
      const parent = byId.get(node.parent);
      if (!parent) {
        continue;
      }
      const edge = document.createElementNS(SVG_NS, "line");
      edge.setAttribute("x1", String(x(parent)));
      edge.setAttribute("y1", String(y(parent)));
      edge.setAttribute("x2", String(x(node)));
      edge.setAttribute("y2", String(y(node)));
      edge.setAttribute("class", "history-edge");
      svg.appendChild(edge);
    }

    for (const node of nodes) {
      if (node.marked) {
        const outline = document.createElementNS(SVG_NS, "circle");
        outline.setAttribute("cx", String(x(node)));
        outline.setAttribute("cy", String(y(node)));
        outline.setAttribute("r", "10");
        outline.setAttribute("class", "history-mark-outline");
        svg.appendChild(outline);
      }
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(x(node)));
      dot.setAttribute("cy", String(y(node)));
      dot.setAttribute("r", "6");
      const isCurrent = node.id === doc.history.current;
      const isPreview = preview?.preview === node.id;
      dot.setAttribute(
        "class",
        `history-node${isCurrent ? " current" : ""}${isPreview ? " preview" : ""}`
      );
      dot.addEventListener("click", () => {
        void this.api.restore(this.state.sessionId, node.id).then((r) => {
          this.state.applyRestore(r.document, r.epoch);
          this.onRestored();
        });
      });
      dot.addEventListener("dblclick", () => {
        void this.api.mark(this.state.sessionId, node.id, !node.marked).then(() => {
          node.marked = !node.marked;
          this.render();
        });
      });
      dot.addEventListener("mouseenter", () => {
        this.state.hover(node.id);
        this.onHover(this.state.previewStates()?.preview ?? null);
      });
      dot.addEventListener("mouseleave", () => {
        this.state.hover(null);
        this.onHover(null);
      });
      svg.appendChild(dot);
      const label = document.createElementNS(SVG_NS, "text");
      label.textContent = node.snapshot.summary_power.toFixed(2);
      label.setAttribute("x", String(x(node)));
      label.setAttribute("y", String(y(node) - 10));
      label.setAttribute("text-anchor", "middle");
      label.setAttribute("class", "tick");
      svg.appendChild(label);
    }
  }
}

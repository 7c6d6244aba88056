// Bootstrap: metadata form, then the five wired views.

import { ApiClient } from "./api.js";
import { ViewState } from "./state.js";
import { AveragesView } from "./views/averages.js";
import { ConfoundsView } from "./views/confounds.js";
import { HistoryView } from "./views/history.js";
import { PairwiseView } from "./views/pairwise.js";
import { PowerView } from "./views/power.js";
import type { DvMetaDto, IvDto } from "./types.js";

const api = new ApiClient("");
const state = new ViewState();

function metadataForm(onSubmit: (dv: DvMetaDto, ivs: IvDto[]) => void): void {
  const host = document.getElementById("app")!;
  host.innerHTML = `
    <div class="panel metadata">
      <h2>Dependent variable</h2>
      <label>Name <input id="dv-name" value="READINGTIME"></label>
      <label>Unit <input id="dv-unit" value="min"></label>
      <label>Expected range
        <input id="dv-min" type="number" value="0"> to
        <input id="dv-max" type="number" value="60"></label>
      <label>Interpretation
        <select id="dv-dir">
          <option value="lower_is_better">lower is better</option>
          <option value="higher_is_better">higher is better</option>
        </select></label>
      <label>Variability (rough spread) <input id="dv-var" type="number" value="5"></label>
      <h2>Independent variables (up to 2)</h2>
      <label>IV 1 <input id="iv1-name" value="MEDIUM">
        levels <input id="iv1-levels" value="PAPER,SCREEN"></label>
      <label>IV 2 (optional) <input id="iv2-name" value="LAYOUT">
        levels <input id="iv2-levels" value="ONE_COLUMN,TWO_COLUMN"></label>
      <button id="start">Start session</button>
    </div>`;
  document.getElementById("start")!.addEventListener("click", () => {
    const value = (id: string) => (document.getElementById(id) as HTMLInputElement).value;
    const dv: DvMetaDto = {
      name: value("dv-name"),
      unit: value("dv-unit"),
      range_min: Number(value("dv-min")),
      range_max: Number(value("dv-max")),
      direction: value("dv-dir") as DvMetaDto["direction"],
      variability: Number(value("dv-var")),
    };
    const ivs: IvDto[] = [];
    for (const prefix of ["iv1", "iv2"]) {
      const name = value(`${prefix}-name`).trim();
      const levels = value(`${prefix}-levels`)
        .split(",")
        .map((s) => s.trim())
        .filter(Boolean);
      if (name && levels.length >= 2) {
        ivs.push({ name, levels });
      }
    }
    onSubmit(dv, ivs);
  });
}

async function startSession(dv: DvMetaDto, ivs: IvDto[]): Promise<void> {
  const created = await api.createSession(dv, ivs);
  const host = document.getElementById("app")!;
  host.innerHTML = "";
  const left = document.createElement("div");
  left.className = "column";
  const right = document.createElement("div");
  right.className = "column";
  host.append(left, right);

  state.adopt(created.id, created.document);
  const averages = new AveragesView(left, state, api);
  const confounds = new ConfoundsView(left, state, api, created.slider_ranges);
  const designPanel = buildDesignPanel(left);
  const pairwise = new PairwiseView(right, state, api);
  const power = new PowerView(right, state, api);
  const history = new HistoryView(right, state, api);

  history.onRestored = () => {
    void pairwise.refresh();
    void power.refresh();
  };
  history.onHover = (nodeId) => {
    // the preview is rendered for exactly one hovered node next to the
    // current state; leaving hover clears it
    if (nodeId === null) {
      pairwise.setPreviewFrame(null);
      power.setPreviewPoints(null);
    }
  };

  averages.render();
  confounds.render();
  designPanel();
  await pairwise.refresh();
  void power.refresh();
}

function buildDesignPanel(container: HTMLElement): () => void {
  const panel = document.createElement("div");
  panel.className = "panel design";
  container.appendChild(panel);
  const render = () => {
    const doc = state.doc;
    if (!doc) {
      return;
    }
    panel.innerHTML = `
      <h2>Experiment design</h2>
      <label>Counterbalancing
        <select id="strategy">
          <option value="complete">complete</option>
          <option value="latin_square">latin square</option>
          <option value="random">random</option>
        </select></label>
      <label>Replications <input id="reps" type="range" min="1" max="10"
        value="${doc.design.replications}">
        <span>${doc.design.replications}</span></label>
      <label>Participants <input id="parts" type="range" min="2" max="60"
        value="${doc.design.participants}">
        <span>${doc.design.participants}</span></label>
      <div id="design-warnings" class="warnings"></div>`;
    (panel.querySelector("#strategy") as HTMLSelectElement).value = doc.design.strategy;
    const push = (payload: Record<string, unknown>) => {
      void api
        .applyUpdate(state.sessionId, { op: "set_design", ...payload, commit: true })
        .then((r) => {
          state.applyUpdate(r.document, r.epoch);
          const box = panel.querySelector("#design-warnings")!;
          box.textContent = r.warnings.map((w) => w.message).join("; ");
        });
    };
    panel.querySelector("#strategy")!.addEventListener("change", (ev) => {
      push({ strategy: (ev.target as HTMLSelectElement).value });
    });
    panel.querySelector("#reps")!.addEventListener("change", (ev) => {
      push({ replications: Number((ev.target as HTMLInputElement).value) });
    });
    panel.querySelector("#parts")!.addEventListener("change", (ev) => {
      push({ participants: Number((ev.target as HTMLInputElement).value) });
    });
  };
  state.onChangeHook(render);
  return render;
}

metadataForm((dv, ivs) => {
  void startSession(dv, ivs);
});

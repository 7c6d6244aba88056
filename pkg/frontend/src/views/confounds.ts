// Confound sliders with a live preview popup of the expected trial series.

import type { ApiClient } from "../api.js";
import type { ViewState } from "../state.js";
import type { SliderRangeDto } from "../types.js";

const LABELS: Record<string, string> = {
  fatigue_per_trial: "Fatigue per trial",
  carryover_magnitude: "Carry-over (first trials)",
  practice_within_condition: "Practice within condition",
  practice_whole_experiment: "Practice whole experiment",
  participant_sd: "Participant variability",
};

export class ConfoundsView {
  private root: HTMLElement;
  private popup: HTMLElement;

  constructor(
    container: HTMLElement,
    private state: ViewState,
    private api: ApiClient,
    private ranges: SliderRangeDto[]
  ) {
    this.root = document.createElement("div");
    this.root.className = "panel confounds";
    container.appendChild(this.root);
    this.popup = document.createElement("div");
    this.popup.className = "preview-popup hidden";
    this.root.appendChild(this.popup);
    state.onChangeHook(() => this.render());
  }

  render(): void {
    const doc = this.state.doc;
    if (!doc) {
      return;
    }
    this.root.querySelectorAll(".slider-row").forEach((el) => el.remove());
    const heading = this.root.querySelector("h2") ?? document.createElement("h2");
    heading.textContent = "Confounds";
    this.root.prepend(heading);

    for (const range of this.ranges) {
      const row = document.createElement("div");
      row.className = "slider-row";
      const label = document.createElement("label");
      label.textContent = LABELS[range.confound] ?? range.confound;
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(range.lo);
      slider.max = String(range.hi);
      slider.step = String(range.step);
      slider.value = String(doc.confounds[range.confound] ?? 0);
      const value = document.createElement("span");
      value.textContent = Number(slider.value).toFixed(2);

      slider.addEventListener("input", () => {
        value.textContent = Number(slider.value).toFixed(2);
        void this.sendValue(range.confound, Number(slider.value), false).then(() =>
          this.showPreview()
        );
      });
      slider.addEventListener("change", () => {
        void this.sendValue(range.confound, Number(slider.value), true);
        this.hidePreviewSoon();
      });
      row.append(label, slider, value);
      this.root.appendChild(row);
    }
  }

  private async sendValue(field: string, value: number, commit: boolean): Promise<void> {
    const r = await this.api.applyUpdate(this.state.sessionId, {
      op: "set_confound",
      field,
      value,
      commit,
    });
    this.state.applyUpdate(r.document, r.epoch);
  }

  private async showPreview(): Promise<void> {
    const bars = await this.api.confoundPreview(this.state.sessionId);
    const max = Math.max(...bars.map((b) => b.expected), 1e-9);
    this.popup.classList.remove("hidden");
    this.popup.innerHTML = "<h3>Expected trial series (participant 1)</h3>";
    const strip = document.createElement("div");
    strip.className = "preview-strip";
    for (const bar of bars) {
      const el = document.createElement("div");
      el.className = "preview-bar";
      el.style.height = `${Math.max(2, (bar.expected / max) * 80)}px`;
      el.title = `trial ${bar.trial}: ${bar.condition.join("/")} = ${bar.expected.toFixed(2)}`;
      strip.appendChild(el);
    }
    this.popup.appendChild(strip);
  }

  private hidePreviewSoon(): void {
    setTimeout(() => this.popup.classList.add("hidden"), 600);
  }
}

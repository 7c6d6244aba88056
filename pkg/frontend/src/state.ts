// Client-side session mirror.
//
// The server is the source of truth: every accepted response replaces the
// local document. Two pieces of state deliberately survive a history
// restore: the power-trade-off selection (pair/min-power + axis), which the
// restore contract excludes, and the hover preview, which always compares
// exactly the current node against one hovered node.

import { EpochGate } from "./stream.js";
import type { AxisMode, SessionDocument, TradeoffDto } from "./types.js";

export interface PreviewPair<T> {
  current: T;
  preview: T | null;
}

export class ViewState {
  sessionId = "";
  doc: SessionDocument | null = null;
  readonly gate = new EpochGate();
  private tradeoff: TradeoffDto = { mode: "min_power", pair: null, axis: "participants" };
  private hoverNode: number | null = null;
  private listeners: (() => void)[] = [];

  onChangeHook(listener: () => void): void {
    this.listeners.push(listener);
  }

  private onChange(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  adopt(sessionId: string, doc: SessionDocument, epoch = 0): void {
    this.sessionId = sessionId;
    this.doc = doc;
    this.tradeoff = { ...doc.settings.tradeoff };
    this.gate.advanceTo(epoch);
    this.onChange();
  }

  /** Apply a server response for a committed or provisional update. */
  applyUpdate(doc: SessionDocument, epoch: number): void {
    this.doc = doc;
    this.tradeoff = { ...doc.settings.tradeoff };
    this.gate.advanceTo(epoch);
    this.onChange();
  }

  /**
   * Apply a restore response. The restored document already retains the
   * trade-off selection server-side; keep the local copy regardless so a
   * restore can never clobber what the user is looking at in the power view.
   */
  applyRestore(doc: SessionDocument, epoch: number): void {
    const kept = this.tradeoff;
    this.doc = doc;
    this.tradeoff = kept;
    this.hoverNode = null;
    this.gate.advanceTo(epoch);
    this.onChange();
  }

  tradeoffSelection(): TradeoffDto {
    return this.tradeoff;
  }

  setTradeoff(mode: "pair" | "min_power", pair: TradeoffDto["pair"], axis: AxisMode): void {
    this.tradeoff = { mode, pair, axis };
    this.onChange();
  }

  // -- hover preview --------------------------------------------------------

  hover(nodeId: number | null): void {
    this.hoverNode = nodeId;
    this.onChange();
  }

  hoveredNode(): number | null {
    return this.hoverNode;
  }

  /** Exactly two states: the current node and at most one preview node. */
  previewStates(): PreviewPair<number> | null {
    if (!this.doc) {
      return null;
    }
    const current = this.doc.history.current;
    if (this.hoverNode === null || this.hoverNode === current) {
      return { current, preview: null };
    }
    return { current, preview: this.hoverNode };
  }
}

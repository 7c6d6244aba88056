// Thin fetch client for the powerforge service.

import { parseSseChunk } from "./stream.js";
import type {
  CurveMessage,
  DvMetaDto,
  IvDto,
  PairwiseFrameDto,
  SessionDocument,
  SliderRangeDto,
} from "./types.js";

export interface CreateSessionResponse {
  id: string;
  document: SessionDocument;
  slider_ranges: SliderRangeDto[];
}

export interface UpdateResponse {
  epoch: number;
  warnings: { code: string; message: string }[];
  document: SessionDocument;
}

export class ApiClient {
  constructor(private baseUrl = "") {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      const payload = await response.json().catch(() => ({}));
      throw new ApiError(payload.error ?? "HTTP_ERROR", payload.message ?? response.statusText);
    }
    return (await response.json()) as T;
  }

  async createSession(dv: DvMetaDto, ivs: IvDto[]): Promise<CreateSessionResponse> {
    return this.post("/sessions", { dv_meta: dv, ivs });
  }

  async applyUpdate(sessionId: string, update: Record<string, unknown>): Promise<UpdateResponse> {
    return this.post(`/sessions/${sessionId}/updates`, update);
  }

  async restore(sessionId: string, nodeId: number): Promise<UpdateResponse> {
    return this.post(`/sessions/${sessionId}/history/${nodeId}/restore`, {});
  }

  async mark(sessionId: string, nodeId: number, marked: boolean): Promise<void> {
    await this.post(`/sessions/${sessionId}/history/${nodeId}/mark`, { marked });
  }

  async pairwiseFrames(sessionId: string, frames: number): Promise<PairwiseFrameDto[][]> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/pairwise-frames?frames=${frames}`
    );
    const payload = await response.json();
    return payload.frames as PairwiseFrameDto[][];
  }

  async confoundPreview(
    sessionId: string
  ): Promise<{ trial: number; condition: string[]; expected: number }[]> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/confound-preview`);
    return (await response.json()).bars;
  }

  /**
   * Open the curve stream and feed each message to the callback until the
   * terminal done message. Returns when the stream closes.
   */
  async streamPowerCurve(
    sessionId: string,
    onMessage: (message: CurveMessage) => void
  ): Promise<void> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/power-curve`);
    const reader = response.body?.getReader();
    if (!reader) {
      return;
    }
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { value, done } = await reader.read();
      if (done) {
        return;
      }
      buffer += decoder.decode(value, { stream: true });
      const cut = buffer.lastIndexOf("\n\n");
      if (cut < 0) {
        continue;
      }
      for (const message of parseSseChunk(buffer.slice(0, cut + 2))) {
        onMessage(message);
        if (message.done) {
          reader.cancel().catch(() => undefined);
          return;
        }
      }
      buffer = buffer.slice(cut + 2);
    }
  }
}

export class ApiError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

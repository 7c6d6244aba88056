// Wire types mirroring the service's JSON documents and stream messages.

export type DirectionDto = "lower_is_better" | "higher_is_better";
export type StrategyDto = "complete" | "latin_square" | "random";
export type AxisMode = "participants" | "replications";
export type TierDto = "analytic" | "simulated";

export interface DvMetaDto {
  name: string;
  unit: string;
  range_min: number;
  range_max: number;
  direction: DirectionDto;
  variability: number;
}

export interface IvDto {
  name: string;
  levels: string[];
}

export interface LeafDto {
  condition: string[];
  value: number;
  locked: boolean;
}

export interface TradeoffDto {
  mode: "pair" | "min_power";
  pair: [string, string, string] | null;
  axis: AxisMode;
}

export interface SessionDocument {
  version: number;
  dv_meta: DvMetaDto;
  ivs: IvDto[];
  design: { strategy: StrategyDto; replications: number; participants: number };
  mean_tree: {
    axis_iv: string;
    leaves: LeafDto[];
    group_locks: boolean[];
    grand_locked: boolean;
  };
  confounds: Record<string, number>;
  history: {
    current: number;
    nodes: HistoryNodeDto[];
  };
  settings: {
    k: number;
    alpha: number;
    seed: number;
    x_lo: number;
    x_hi: number;
    tradeoff: TradeoffDto;
    pairwise_pairs: [string, string, string][];
  };
}

export interface HistoryNodeDto {
  id: number;
  parent: number | null;
  marked: boolean;
  depth: number;
  snapshot: { summary_power: number; [key: string]: unknown };
}

export interface CurveMessage {
  epoch: number;
  done?: boolean;
  cancelled?: boolean;
  tier?: TierDto;
  x?: number;
  power?: number;
  mc_stderr?: number;
}

export interface CurvePoint {
  x: number;
  power: number;
  mcStderr: number;
  tier: TierDto;
}

export interface PairwiseFrameDto {
  pair: string;
  mean_diff: number;
  ci_lo: number;
  ci_hi: number;
  cohens_d: number | null;
  degenerate: boolean;
  better_level: string | null;
}

export interface SliderRangeDto {
  confound: string;
  lo: number;
  hi: number;
  step: number;
}

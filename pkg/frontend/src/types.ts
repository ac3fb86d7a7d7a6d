/** Typed mirror of the service's JSON schema (envelope version 1). */

export interface Envelope<T> {
  status: string;
  data: T;
  provenance: Record<string, unknown>;
  schema_version: number;
}

export interface Recipe {
  id: string;
  multipliers: Record<string, number>;
}

export interface ScenariosPayload {
  bank: string;
  seed: number;
  recipes: Recipe[];
}

export interface ScenarioOutputsPayload {
  id: string;
  objective: number;
  co2_gap_rewt: number;
  pur_co2: number[];
  total_abatement_fms: number;
  total_abatement_agri: number;
  cap_fms_total: number;
  cap_agri_total: number;
  years: number[];
}

/** (idA, idB, rho) extremal pair as served. */
export type ExtremalPair = [string, string, number];

export interface ClustersPayload {
  ids: string[];
  rho: number[][];
  /** rows of (a, b, height, size) with new cluster ids n, n+1, ... */
  linkage: number[][];
  labels: number[];
  threshold: number;
  most_similar: ExtremalPair;
  least_similar: ExtremalPair;
}

export interface PredictPayload {
  predictions: number[];
  target_range: [number, number];
}

export interface ShapPayload {
  phi: number[][];
  phi0: number[];
  sample_index: number[];
  feature_names: string[];
  global_ranking: { name: string; mean_abs_shap: number }[];
}

export interface ParsedQueryEcho {
  parameter: string;
  multiplier: number | null;
  direction: string;
  raw: string;
}

export interface AskPayload {
  parsed: ParsedQueryEcho;
  matched_ids: string[];
  nearest: boolean;
  grounding: {
    cluster_id: number;
    cluster_size: number;
    intra_rho: number;
    representative_recipes: Record<string, Record<string, number>>;
  };
  prompt: string;
  narrative: string;
}

export interface UiConfig {
  baseUrl: string;
  stub: boolean;
}

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service error ${status}: ${detail}`);
  }
}

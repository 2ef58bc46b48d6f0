/** Payload shapes of the daytrip design service. */

export interface ChangePayload {
  kind: "add" | "remove" | "noop";
  target: number | null;
}

export interface PoiRecord {
  id: number;
  x_km: number;
  y_km: number;
  category: number;
  visit_duration_h: number;
  entry_cost: number;
}

export interface CityDoc {
  schema: string;
  size_km: number;
  n_categories: number;
  visit_duration_range: [number, number];
  entry_cost_range: [number, number];
  seed: number | null;
  categories: string[];
  pois: PoiRecord[];
}

export interface Outcomes {
  walking_time_h: number;
  visit_time_h: number;
  total_duration_h: number;
  total_cost: number;
  tour_length_km: number;
}

export interface PosteriorSummary {
  entropy: number;
  ess: number;
  n_particles: number;
  top_particle: Record<string, unknown>;
}

export interface SessionState {
  session_id: string;
  iteration: number;
  trip: { tour: number[]; outcomes: Outcomes };
  legal_changes: ChangePayload[];
  posterior: PosteriorSummary;
  recommendation_pending: boolean;
  history_length: number;
}

export interface WhatIfReport {
  change: string;
  trip_after: number[];
  outcomes_after: Outcomes;
  outcome_deltas: Record<string, number>;
  posterior_mean_utility_delta: number;
}

export interface RecommendationResponse {
  recommendation?: ChangePayload;
  whatif?: WhatIfReport;
  no_recommendation?: boolean;
}

export function describeChange(change: ChangePayload): string {
  return change.kind === "noop" ? "noop" : `${change.kind}:${change.target}`;
}

export function sameChange(a: ChangePayload, b: ChangePayload): boolean {
  return a.kind === b.kind && (a.target ?? null) === (b.target ?? null);
}

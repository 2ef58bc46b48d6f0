import { describe, expect, it } from "vitest";

import { toViewState } from "../src/model.js";
import type {
  CityDoc,
  Outcomes,
  RecommendationResponse,
  SessionState,
  WhatIfReport,
} from "../src/types.js";

function city(): CityDoc {
  return {
    schema: "daytrip-city/1",
    size_km: 10,
    n_categories: 5,
    visit_duration_range: [0.5, 2.5],
    entry_cost_range: [0, 30],
    seed: 1,
    categories: ["museum", "gallery", "park", "landmark", "market"],
    pois: [
      { id: 0, x_km: 1, y_km: 1, category: 0, visit_duration_h: 1, entry_cost: 5 },
      { id: 1, x_km: 2, y_km: 5, category: 1, visit_duration_h: 1, entry_cost: 8 },
      { id: 2, x_km: 7, y_km: 3, category: 2, visit_duration_h: 1, entry_cost: 0 },
      { id: 3, x_km: 9, y_km: 9, category: 3, visit_duration_h: 1, entry_cost: 2 },
    ],
  };
}

const zeroOutcomes: Outcomes = {
  walking_time_h: 0,
  visit_time_h: 0,
  total_duration_h: 0,
  total_cost: 0,
  tour_length_km: 0,
};

function state(partial: Partial<SessionState> = {}): SessionState {
  return {
    session_id: "s",
    iteration: 0,
    trip: { tour: [], outcomes: zeroOutcomes },
    legal_changes: [
      { kind: "add", target: 0 },
      { kind: "add", target: 1 },
      { kind: "add", target: 2 },
      { kind: "noop", target: null },
    ],
    posterior: { entropy: 2.0, ess: 16, n_particles: 16, top_particle: {} },
    recommendation_pending: false,
    history_length: 0,
    ...partial,
  };
}

describe("toViewState", () => {
  it("renders an empty trip with no polyline and zero outcomes", () => {
    const view = toViewState(city(), state(), null);
    expect(view.route).toEqual([]);
    expect(view.outcomes.total_duration_h).toBe(0);
    expect(view.markers).toHaveLength(4);
    expect(view.markers.every((m) => !m.inTrip)).toBe(true);
    expect(view.recommendation).toBeNull();
  });

  it("closes a three-point route when the tour is a round trip", () => {
    const s = state({
      trip: { tour: [0, 1, 2], outcomes: zeroOutcomes },
      legal_changes: [
        { kind: "remove", target: 0 },
        { kind: "remove", target: 1 },
        { kind: "remove", target: 2 },
        { kind: "noop", target: null },
      ],
    });
    const view = toViewState(city(), s, null, { closed: true });
    expect(view.route).toHaveLength(4);
    expect(view.route[0]).toEqual(view.route[3]);
    const open = toViewState(city(), s, null, { closed: false });
    expect(open.route).toHaveLength(3);
  });

  it("marks exactly one recommended POI with dashed styling", () => {
    const rec: RecommendationResponse = {
      recommendation: { kind: "add", target: 2 },
      whatif: {
        change: "add:2",
        trip_after: [2],
        outcomes_after: zeroOutcomes,
        outcome_deltas: { total_cost: 0 },
        posterior_mean_utility_delta: 0.1,
      },
    };
    const view = toViewState(city(), state(), rec);
    const flagged = view.markers.filter((m) => m.recommended !== null);
    expect(flagged).toHaveLength(1);
    expect(flagged[0]?.id).toBe(2);
    expect(flagged[0]?.recommended).toBe("add");
  });

  it("maps taps to removal for members and add for legal candidates only", () => {
    const s = state({
      trip: { tour: [0], outcomes: zeroOutcomes },
      legal_changes: [
        { kind: "add", target: 1 },
        { kind: "remove", target: 0 },
        { kind: "noop", target: null },
      ],
    });
    const view = toViewState(city(), s, null);
    const byId = new Map(view.markers.map((m) => [m.id, m]));
    expect(byId.get(0)?.tapChange).toEqual({ kind: "remove", target: 0 });
    expect(byId.get(1)?.tapChange).toEqual({ kind: "add", target: 1 });
    expect(byId.get(2)?.tapChange).toBeNull(); // over budget: disabled
    expect(byId.get(3)?.tapChange).toBeNull();
  });

  it("projects a what-if preview without touching the base route", () => {
    const preview: WhatIfReport = {
      change: "add:1",
      trip_after: [0, 1],
      outcomes_after: zeroOutcomes,
      outcome_deltas: { total_cost: 8 },
      posterior_mean_utility_delta: -0.02,
    };
    const s = state({ trip: { tour: [0], outcomes: zeroOutcomes } });
    const view = toViewState(city(), s, null, { preview, closed: true });
    expect(view.route).toHaveLength(1);
    expect(view.preview?.route).toHaveLength(3); // two points plus closure
    expect(view.preview?.deltas["total_cost"]).toBe(8);
  });

  it("throws on malformed payloads instead of partially rendering", () => {
    const bad = state();
    // @ts-expect-error deliberately broken payload
    bad.trip = { outcomes: zeroOutcomes };
    expect(() => toViewState(city(), bad, null)).toThrow(/malformed/);
    const unknown = state({ trip: { tour: [99], outcomes: zeroOutcomes } });
    expect(() => toViewState(city(), unknown, null)).toThrow(/unknown POI/);
  });
});

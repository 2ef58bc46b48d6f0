/** Pure projection of service payloads into a renderable view model.
 *
 * No design logic lives here: the view is exactly what the last service
 * response said, plus an optional non-destructive what-if preview overlay.
 * Malformed payloads throw before anything is produced, so callers can show
 * an error banner instead of a partial render.
 */

import type {
  ChangePayload,
  CityDoc,
  Outcomes,
  RecommendationResponse,
  SessionState,
  WhatIfReport,
} from "./types.js";
import { describeChange } from "./types.js";

export interface Marker {
  id: number;
  x: number;
  y: number;
  category: number;
  inTrip: boolean;
  /** dashed-ring styling when the assistant recommends adding/removing it */
  recommended: "add" | "remove" | null;
  /** the change a tap would send; null renders the marker disabled */
  tapChange: ChangePayload | null;
}

export interface Point {
  x: number;
  y: number;
}

export interface PreviewOverlay {
  route: Point[];
  deltas: Record<string, number>;
  utilityDelta: number;
}

export interface ViewState {
  markers: Marker[];
  route: Point[];
  recommendation: { change: ChangePayload; whatif: WhatIfReport } | null;
  outcomes: Outcomes;
  posteriorEntropy: number;
  iteration: number;
  historyLength: number;
  preview: PreviewOverlay | null;
}

function assertShape(condition: boolean, what: string): asserts condition {
  if (!condition) {
    throw new Error(`malformed payload: ${what}`);
  }
}

function tourPolyline(city: CityDoc, tour: number[], closed: boolean): Point[] {
  const byId = new Map(city.pois.map((p) => [p.id, p]));
  const points = tour.map((id) => {
    const poi = byId.get(id);
    assertShape(poi !== undefined, `tour references unknown POI ${id}`);
    return { x: poi.x_km, y: poi.y_km };
  });
  if (closed && points.length >= 2) {
    const first = points[0];
    if (first !== undefined) points.push(first);
  }
  return points;
}

export function toViewState(
  city: CityDoc,
  state: SessionState,
  recommendation: RecommendationResponse | null,
  options: { closed?: boolean; preview?: WhatIfReport | null } = {},
): ViewState {
  const closed = options.closed ?? true;
  assertShape(Array.isArray(state.trip?.tour), "missing trip.tour");
  assertShape(Array.isArray(state.legal_changes), "missing legal_changes");
  assertShape(typeof state.trip.outcomes?.total_duration_h === "number", "missing outcomes");

  const rec =
    recommendation && recommendation.recommendation && recommendation.whatif
      ? { change: recommendation.recommendation, whatif: recommendation.whatif }
      : null;
  if (rec) {
    assertShape(rec.change.kind === "add" || rec.change.kind === "remove",
      "recommendation must add or remove");
    assertShape(Array.isArray(rec.whatif.trip_after), "missing whatif trip");
  }

  const inTrip = new Set(state.trip.tour);
  const legalAdds = new Set(
    state.legal_changes.filter((c) => c.kind === "add").map((c) => c.target),
  );
  const markers: Marker[] = city.pois.map((poi) => {
    const member = inTrip.has(poi.id);
    let recommended: Marker["recommended"] = null;
    if (rec && rec.change.target === poi.id) {
      recommended = rec.change.kind === "add" ? "add" : "remove";
    }
    let tapChange: ChangePayload | null = null;
    if (member) {
      tapChange = { kind: "remove", target: poi.id };
    } else if (legalAdds.has(poi.id)) {
      tapChange = { kind: "add", target: poi.id };
    }
    return {
      id: poi.id,
      x: poi.x_km,
      y: poi.y_km,
      category: poi.category,
      inTrip: member,
      recommended,
      tapChange,
    };
  });

  let preview: PreviewOverlay | null = null;
  if (options.preview) {
    preview = {
      route: tourPolyline(city, options.preview.trip_after, closed),
      deltas: options.preview.outcome_deltas,
      utilityDelta: options.preview.posterior_mean_utility_delta,
    };
  }

  return {
    markers,
    route: tourPolyline(city, state.trip.tour, closed),
    recommendation: rec,
    outcomes: state.trip.outcomes,
    posteriorEntropy: state.posterior.entropy,
    iteration: state.iteration,
    historyLength: state.history_length,
    preview,
  };
}

/** History entry text for the action list. */
export function historyLine(iteration: number, change: ChangePayload, recommended: boolean): string {
  const suffix = recommended ? " (recommended)" : "";
  return `#${iteration} ${describeChange(change)}${suffix}`;
}

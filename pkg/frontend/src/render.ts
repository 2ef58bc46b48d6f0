/** SVG and panel rendering from the view model (pure string builders). */

import type { CityDoc, Outcomes } from "./types.js";
import { describeChange } from "./types.js";
import type { Marker, Point, ViewState } from "./model.js";

export const CATEGORY_COLORS = ["#4c78a8", "#f58518", "#54a24b", "#b279a2", "#e45756"];

export function fmt1(value: number): string {
  return (Math.round(value * 10) / 10).toFixed(1);
}

export function fmtMoney(value: number): string {
  const rounded = Math.round(value);
  return rounded === 0 ? "0" : String(rounded);
}

function signed(text: string, value: number): string {
  return value >= 0 ? `+${text}` : text;
}

function polyline(points: Point[], scale: number, cls: string): string {
  if (points.length < 2) {
    return "";
  }
  const coords = points.map((p) => `${(p.x * scale).toFixed(1)},${(p.y * scale).toFixed(1)}`);
  return `<polyline class="${cls}" points="${coords.join(" ")}" fill="none"/>`;
}

function markerSvg(marker: Marker, scale: number): string {
  const cx = (marker.x * scale).toFixed(1);
  const cy = (marker.y * scale).toFixed(1);
  const color = CATEGORY_COLORS[marker.category % CATEGORY_COLORS.length];
  const classes = ["poi"];
  if (marker.inTrip) classes.push("in-trip");
  if (!marker.tapChange) classes.push("disabled");
  let ring = "";
  if (marker.recommended) {
    // the single dashed ring marking the assistant's recommendation
    ring =
      `<circle class="recommended ${marker.recommended}" cx="${cx}" cy="${cy}" r="13" ` +
      `fill="none" stroke-dasharray="4 3"/>`;
  }
  const fill = marker.inTrip ? color : "white";
  return (
    `<g class="${classes.join(" ")}" data-poi="${marker.id}">` +
    `<circle cx="${cx}" cy="${cy}" r="7" fill="${fill}" stroke="${color}"/>` +
    ring +
    `</g>`
  );
}

export function renderSvg(view: ViewState, city: CityDoc, widthPx = 640): string {
  const scale = widthPx / city.size_km;
  const parts = [
    `<svg viewBox="0 0 ${widthPx} ${widthPx}" width="${widthPx}" height="${widthPx}" ` +
      `xmlns="http://www.w3.org/2000/svg">`,
    `<rect width="${widthPx}" height="${widthPx}" class="map-bg" fill="#f7f7f4"/>`,
    polyline(view.route, scale, "route"),
  ];
  if (view.preview) {
    parts.push(polyline(view.preview.route, scale, "route preview"));
  }
  for (const marker of view.markers) {
    parts.push(markerSvg(marker, scale));
  }
  parts.push("</svg>");
  return parts.filter(Boolean).join("\n");
}

export function renderOutcomes(outcomes: Outcomes): string {
  return [
    `<dt>walking</dt><dd>${fmt1(outcomes.walking_time_h)} h</dd>`,
    `<dt>visiting</dt><dd>${fmt1(outcomes.visit_time_h)} h</dd>`,
    `<dt>total</dt><dd>${fmt1(outcomes.total_duration_h)} h</dd>`,
    `<dt>distance</dt><dd>${fmt1(outcomes.tour_length_km)} km</dd>`,
    `<dt>cost</dt><dd>${fmtMoney(outcomes.total_cost)}</dd>`,
  ].join("");
}

/** The what-if panel: outcome deltas of the recommendation or hover preview. */
export function renderDeltaPanel(
  title: string,
  deltas: Record<string, number>,
  utilityDelta: number,
): string {
  const rows = [
    ["trip length", `${signed(fmt1(deltas["tour_length_km"] ?? 0), deltas["tour_length_km"] ?? 0)} km`],
    ["duration", `${signed(fmt1(deltas["total_duration_h"] ?? 0), deltas["total_duration_h"] ?? 0)} h`],
    ["cost", signed(fmtMoney(deltas["total_cost"] ?? 0), deltas["total_cost"] ?? 0)],
    ["est. utility", signed(utilityDelta.toFixed(3), utilityDelta)],
  ];
  const items = rows.map(([k, v]) => `<dt>${k}</dt><dd>${v}</dd>`).join("");
  return `<h3>${title}</h3><dl>${items}</dl>`;
}

export function renderRecommendationLabel(view: ViewState): string {
  if (!view.recommendation) {
    return "no recommendation";
  }
  return `assistant suggests ${describeChange(view.recommendation.change)}`;
}

export function countDashedMarkers(svg: string): number {
  return (svg.match(/class="recommended/g) ?? []).length;
}

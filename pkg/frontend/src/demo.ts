/** Deterministic demo city so the page (and tests) work without a generated
 * city file. Data only; the service owns all design logic. */

import type { CityDoc } from "./types.js";

export function demoCity(n = 30, seedValue = 9): CityDoc {
  let s = seedValue >>> 0 || 1;
  const rand = () => {
    // xorshift32; fine for demo data
    s ^= s << 13;
    s ^= s >>> 17;
    s ^= s << 5;
    return ((s >>> 0) % 100000) / 100000;
  };
  const pois = Array.from({ length: n }, (_, i) => ({
    id: i,
    x_km: +(rand() * 10).toFixed(3),
    y_km: +(rand() * 10).toFixed(3),
    category: Math.floor(rand() * 5),
    visit_duration_h: +(0.5 + rand() * 2).toFixed(2),
    entry_cost: +(rand() * 30).toFixed(2),
  }));
  return {
    schema: "daytrip-city/1",
    size_km: 10,
    n_categories: 5,
    visit_duration_range: [0.5, 2.5],
    entry_cost_range: [0, 30],
    seed: seedValue,
    categories: ["museum", "gallery", "park", "landmark", "market"],
    pois,
  };
}

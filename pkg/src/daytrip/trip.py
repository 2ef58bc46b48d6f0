"""The day-trip design domain: tours, outcomes, parametric utility, legality.

A design state is an ordered tour over a subset of the city's POIs. Applying
a change under OBJECTIVE dynamics re-routes the tour optimally (what the
system really does); under SUBJECTIVE dynamics it uses the designer's mental
shortcut (largest-angle insertion, order-preserving removal). The duration
budget is a hard legality constraint on adds, judged on the optimally routed
trip.

Utility is a weighted combination of two O(1)-scaled scores: an enjoyment
score (category-preference-weighted visit hours minus a walking penalty,
normalized by the duration budget) and a cost score (negative total cost over
a fixed scale). It is linear in a small feature vector, which the vectorized
particle evaluations exploit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .city import City
from .core import (
    NOOP,
    ChangeKind,
    DesignChange,
    DesignProcess,
    Dynamics,
    IllegalChangeError,
    InvalidStateError,
    add_poi,
    remove_poi,
)
from .user_model import subjective_insert

_TOL = 1e-9


@dataclass(frozen=True)
class TripConfig:
    duration_budget_h: float = 12.0
    walking_speed_kmh: float = 5.0
    cost_scale: float = 100.0
    tour_mode: str = "closed"  # "closed" round trip or "open" path
    exact_tsp_threshold: int = 10

    def __post_init__(self):
        if self.duration_budget_h <= 0 or self.walking_speed_kmh <= 0 or self.cost_scale <= 0:
            raise ValueError("budget, walking speed, and cost scale must be positive")
        if self.tour_mode not in ("closed", "open"):
            raise ValueError(f"tour_mode must be 'closed' or 'open', got {self.tour_mode!r}")

    @property
    def closed(self) -> bool:
        return self.tour_mode == "closed"


@dataclass(frozen=True)
class TripDesign:
    """An ordered tour over POI ids."""

    tour: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tour", tuple(self.tour))
        if len(set(self.tour)) != len(self.tour):
            raise InvalidStateError(f"duplicate POI ids in tour {self.tour}")

    @property
    def poi_set(self) -> frozenset[int]:
        return frozenset(self.tour)

    def __contains__(self, poi_id: int) -> bool:
        return poi_id in self.tour

    def serialize(self) -> str:
        return json.dumps(list(self.tour), separators=(",", ":"))


@dataclass(frozen=True)
class TripOutcomes:
    walking_time_h: float
    visit_time_h: float
    total_duration_h: float
    total_cost: float
    tour_length_km: float

    def as_dict(self) -> dict[str, float]:
        return {
            "walking_time_h": self.walking_time_h,
            "visit_time_h": self.visit_time_h,
            "total_duration_h": self.total_duration_h,
            "total_cost": self.total_cost,
            "tour_length_km": self.tour_length_km,
        }


@dataclass(frozen=True)
class TripUtilityParams:
    """Latent designer goal: cost/enjoyment trade-off, per-category taste,
    and distaste for walking."""

    cost_weight: float
    category_prefs: tuple[float, ...]
    walk_penalty: float

    def __post_init__(self):
        object.__setattr__(self, "category_prefs", tuple(self.category_prefs))
        if not 0.0 <= self.cost_weight <= 1.0:
            raise ValueError("cost_weight must lie in [0, 1]")
        if any(not 0.0 <= p <= 1.0 for p in self.category_prefs):
            raise ValueError("category preferences must lie in [0, 1]")
        if self.walk_penalty < 0:
            raise ValueError("walk_penalty must be >= 0")


@dataclass(frozen=True)
class TripUtilityPrior:
    """Assistant's hypothesis ranges for utility parameters."""

    n_categories: int
    cost_weight_range: tuple[float, float] = (0.0, 1.0)
    pref_range: tuple[float, float] = (0.0, 1.0)
    walk_penalty_range: tuple[float, float] = (0.0, 1.0)

    def sample(self, rng: np.random.Generator) -> TripUtilityParams:
        cw = rng.uniform(*self.cost_weight_range)
        prefs = rng.uniform(*self.pref_range, size=self.n_categories)
        wp = rng.uniform(*self.walk_penalty_range)
        return TripUtilityParams(float(cw), tuple(float(p) for p in prefs), float(wp))

    def jitter(self, params: TripUtilityParams, scale: float, rng: np.random.Generator) -> TripUtilityParams:
        """Gaussian rejuvenation noise, clipped to the prior ranges."""

        def bump(v, lo, hi):
            return float(np.clip(v + rng.normal(0.0, scale * (hi - lo)), lo, hi))

        return TripUtilityParams(
            bump(params.cost_weight, *self.cost_weight_range),
            tuple(bump(p, *self.pref_range) for p in params.category_prefs),
            bump(params.walk_penalty, *self.walk_penalty_range),
        )


def trip_outcomes(trip: TripDesign, city: City, config: TripConfig) -> TripOutcomes:
    """Realized consequences of the trip: time walking and visiting, money spent."""
    visit = 0.0
    cost = 0.0
    for pid in trip.tour:
        poi = city.poi(pid)
        visit += poi.visit_duration_h
        cost += poi.entry_cost
    arr = city.arrays()
    rows = np.array([city.row_of(i) for i in trip.tour], dtype=np.int64)
    length = float(kernels.tour_len(rows, len(rows), arr.dist, config.closed))
    walking = length / config.walking_speed_kmh
    return TripOutcomes(
        walking_time_h=walking,
        visit_time_h=visit,
        total_duration_h=walking + visit,
        total_cost=cost,
        tour_length_km=length,
    )


def trip_utility(
    outcomes: TripOutcomes,
    trip: TripDesign,
    params: TripUtilityParams,
    city: City,
    config: TripConfig,
) -> float:
    """U = (1 - cost_weight) * enjoyment + cost_weight * cost_score.

    enjoyment = (sum of pref[category] * visit hours - walk_penalty * walking
    hours) / duration budget; cost_score = -total_cost / cost_scale. Both
    scores are O(1) so the weight is identifiable.
    """
    enjoy = 0.0
    for pid in trip.tour:
        poi = city.poi(pid)
        enjoy += params.category_prefs[poi.category] * poi.visit_duration_h
    enjoy -= params.walk_penalty * outcomes.walking_time_h
    enjoy /= config.duration_budget_h
    cost_score = -outcomes.total_cost / config.cost_scale
    return (1.0 - params.cost_weight) * enjoy + params.cost_weight * cost_score


def trip_features(trip: TripDesign, city: City, config: TripConfig) -> np.ndarray:
    """Feature vector [visit hours per category, walking hours, total cost];
    utility is linear in it."""
    arr = city.arrays()
    feats = np.zeros(arr.k + 2)
    rows = np.array([city.row_of(i) for i in trip.tour], dtype=np.int64)
    for r in rows:
        feats[arr.cat[r]] += arr.dur[r]
        feats[arr.k + 1] += arr.cost[r]
    length = float(kernels.tour_len(rows, len(rows), arr.dist, config.closed))
    feats[arr.k] = length / config.walking_speed_kmh
    return feats


def utility_weight_vector(params: TripUtilityParams, config: TripConfig, n_categories: int) -> np.ndarray:
    """Weights w such that utility == w . features(trip)."""
    if len(params.category_prefs) != n_categories:
        raise ValueError(
            f"expected {n_categories} category preferences, got {len(params.category_prefs)}"
        )
    w = np.empty(n_categories + 2)
    scale = (1.0 - params.cost_weight) / config.duration_budget_h
    for k, pref in enumerate(params.category_prefs):
        w[k] = scale * pref
    w[n_categories] = -scale * params.walk_penalty
    w[n_categories + 1] = -params.cost_weight / config.cost_scale
    return w


class TripProcess(DesignProcess):
    """Day-trip instantiation of the design process.

    Pure value semantics throughout; the only internal state is caching
    (optimal routes by POI set, legal-change lists, lookahead values), which
    never changes results.
    """

    def __init__(self, city: City, config: TripConfig | None = None):
        self.city = city
        self.config = config or TripConfig()
        self._route_cache: dict[frozenset[int], tuple[tuple[int, ...], float]] = {}
        self._legal_cache: dict[tuple[int, ...], list[DesignChange]] = {}
        self._q_cache: dict = {}

    # -- routing -----------------------------------------------------------

    def optimal_route(self, poi_ids: frozenset[int]) -> tuple[tuple[int, ...], float]:
        """Optimal order and its walk length (km) for a POI set, cached."""
        hit = self._route_cache.get(poi_ids)
        if hit is not None:
            return hit
        from .routing import route_optimal  # local import to avoid a cycle at module load

        order = route_optimal(
            self.city, sorted(poi_ids), self.config.closed, self.config.exact_tsp_threshold
        )
        arr = self.city.arrays()
        rows = np.array([self.city.row_of(i) for i in order], dtype=np.int64)
        length = float(kernels.tour_len(rows, len(rows), arr.dist, self.config.closed))
        result = (order, length)
        self._route_cache[poi_ids] = result
        return result

    # -- DesignProcess interface -------------------------------------------

    def validate_state(self, state: TripDesign) -> None:
        for pid in state.tour:
            if pid not in self.city:
                raise InvalidStateError(f"unknown POI id {pid}")
        _, opt_len = self.optimal_route(state.poi_set)
        visit = sum(self.city.poi(p).visit_duration_h for p in state.tour)
        if visit + opt_len / self.config.walking_speed_kmh > self.config.duration_budget_h + _TOL:
            raise InvalidStateError(
                f"trip over {len(state.tour)} POIs cannot fit the "
                f"{self.config.duration_budget_h}h budget even optimally routed"
            )

    def legal_changes(self, state: TripDesign, dynamics: Dynamics = Dynamics.OBJECTIVE) -> list[DesignChange]:
        if dynamics is Dynamics.OBJECTIVE:
            key = state.tour
            hit = self._legal_cache.get(key)
            if hit is None:
                hit = self._legal_objective(state)
                if len(self._legal_cache) > 64:
                    self._legal_cache.clear()
                self._legal_cache[key] = hit
            return list(hit)
        return self._legal_subjective(state)

    def _legal_objective(self, state: TripDesign) -> list[DesignChange]:
        self.validate_state(state)
        cfg = self.config
        arr = self.city.arrays()
        members = state.poi_set
        _, opt_len = self.optimal_route(members)
        opt_order_rows = None
        visit = sum(self.city.poi(p).visit_duration_h for p in state.tour)
        budget = cfg.duration_budget_h
        # the insertion upper bound may only ACCEPT while the grown set is
        # still routed exactly; above the threshold the heuristic router used
        # by apply() is not guaranteed to beat it, so route for real there
        bounds_ok = len(members) + 1 <= cfg.exact_tsp_threshold
        changes = []
        for poi in self.city.pois:
            if poi.id in members:
                continue
            base = visit + poi.visit_duration_h
            # re-routing after an add never shortens the walk (metric shortcutting)
            if base + opt_len / cfg.walking_speed_kmh > budget + _TOL:
                continue
            if bounds_ok:
                if opt_order_rows is None:
                    opt_order, _ = self.optimal_route(members)
                    opt_order_rows = np.array(
                        [self.city.row_of(i) for i in opt_order], dtype=np.int64
                    )
                ins = kernels.cheapest_insertion_delta(
                    opt_order_rows, len(opt_order_rows), arr.dist,
                    self.city.row_of(poi.id), cfg.closed,
                )
                if base + (opt_len + ins) / cfg.walking_speed_kmh <= budget + _TOL:
                    changes.append(add_poi(poi.id))
                    continue
            # bounds disagree (or heuristic regime): settle with the same
            # routing apply() will use
            _, routed_len = self.optimal_route(members | {poi.id})
            if base + routed_len / cfg.walking_speed_kmh <= budget + _TOL:
                changes.append(add_poi(poi.id))
        changes.extend(remove_poi(pid) for pid in sorted(state.tour))
        changes.append(NOOP)
        return changes

    def _legal_subjective(self, state: TripDesign) -> list[DesignChange]:
        """The designer's imagined action set: adds must fit the budget under
        max-angle insertion into the current order."""
        cfg = self.config
        arr = self.city.arrays()
        rows = np.array([self.city.row_of(i) for i in state.tour], dtype=np.int64)
        walk = float(kernels.tour_len(rows, len(rows), arr.dist, cfg.closed)) / cfg.walking_speed_kmh
        visit = sum(self.city.poi(p).visit_duration_h for p in state.tour)
        changes = []
        for poi in self.city.pois:
            if poi.id in state.tour:
                continue
            _, delta = kernels.max_angle_slot(
                rows, len(rows), arr.xs, arr.ys, arr.dist, self.city.row_of(poi.id), cfg.closed
            )
            if walk + delta / cfg.walking_speed_kmh + visit + poi.visit_duration_h <= cfg.duration_budget_h + _TOL:
                changes.append(add_poi(poi.id))
        changes.extend(remove_poi(pid) for pid in sorted(state.tour))
        changes.append(NOOP)
        return changes

    def apply(self, state: TripDesign, change: DesignChange, dynamics: Dynamics = Dynamics.OBJECTIVE) -> TripDesign:
        if change.is_noop:
            return state
        if change.kind is ChangeKind.ADD:
            if change.target not in self.city:
                raise IllegalChangeError(f"unknown POI id {change.target}")
            if change.target in state.tour:
                raise IllegalChangeError(f"POI {change.target} already in trip")
            if dynamics is Dynamics.OBJECTIVE:
                new_set = state.poi_set | {change.target}
                order, length = self.optimal_route(new_set)
                visit = sum(self.city.poi(p).visit_duration_h for p in order)
                if visit + length / self.config.walking_speed_kmh > self.config.duration_budget_h + _TOL:
                    raise IllegalChangeError(
                        f"adding POI {change.target} exceeds the duration budget"
                    )
                return TripDesign(order)
            new_tour = subjective_insert(
                state.tour, change.target, self.city, self.config.closed
            )
            return TripDesign(new_tour)
        # removal
        if change.target not in state.tour:
            raise IllegalChangeError(f"POI {change.target} not in trip")
        remaining = tuple(p for p in state.tour if p != change.target)
        if dynamics is Dynamics.OBJECTIVE:
            order, _ = self.optimal_route(frozenset(remaining))
            return TripDesign(order)
        return TripDesign(remaining)  # the order remains unchanged

    def outcomes(self, state: TripDesign) -> TripOutcomes:
        return trip_outcomes(state, self.city, self.config)

    def utility(self, state: TripDesign, utility_params: TripUtilityParams) -> float:
        return float(
            utility_weight_vector(utility_params, self.config, self.city.arrays().k)
            @ self.features(state)
        )

    def features(self, state: TripDesign) -> np.ndarray:
        return trip_features(state, self.city, self.config)

    def utility_weights(self, utility_params: TripUtilityParams) -> np.ndarray:
        return utility_weight_vector(utility_params, self.config, self.city.arrays().k)

    def serialize_state(self, state: TripDesign) -> str:
        return state.serialize()

    # -- vectorized lookahead ------------------------------------------------

    def q_matrix(self, state, actions, utility_params, horizons, beam_width):
        """Shared-tree lookahead for many hypotheses at once.

        The subjective tree below `state` is the same for every hypothesis;
        utilities differ only through the linear weights, so each level's
        values come from one matrix product. Per-hypothesis planning horizons
        select which backed-up value each row receives, and per-hypothesis
        beam masks reproduce the truncation rule of the reference
        implementation exactly.
        """
        horizons = np.asarray(horizons, dtype=np.int64)
        n_params = len(utility_params)
        if n_params == 0 or len(actions) == 0:
            return np.zeros((n_params, len(actions)))
        hmax = int(horizons.max())
        if hmax > 2:
            return super().q_matrix(state, actions, utility_params, horizons, beam_width)

        key = (
            state.tour,
            tuple(actions),
            tuple(utility_params),
            horizons.tobytes(),
            beam_width,
        )
        hit = self._q_cache.get(key)
        if hit is not None:
            return hit

        cfg = self.config
        arr = self.city.arrays()
        K = arr.k
        thetas = np.stack([self.utility_weights(u) for u in utility_params])

        # level 1: one child per requested action, under subjective dynamics
        n1 = len(actions)
        width = arr.n
        tours1 = np.full((n1, max(width, 1)), -1, dtype=np.int64)
        lens1 = np.empty(n1, dtype=np.int64)
        feats1 = np.empty((n1, K + 2))
        vis1 = np.empty(n1)
        for i, action in enumerate(actions):
            child = self.apply(state, action, Dynamics.SUBJECTIVE)
            rows = np.array([self.city.row_of(p) for p in child.tour], dtype=np.int64)
            tours1[i, : len(rows)] = rows
            lens1[i] = len(rows)
            feats1[i] = trip_features(child, self.city, cfg)
            vis1[i] = float(np.sum(arr.dur[rows])) if len(rows) else 0.0

        U1 = thetas @ feats1.T
        Q = U1.copy()
        if hmax == 0:
            self._q_cache_put(key, Q)
            return Q

        rows_h1 = np.flatnonzero(horizons >= 1)
        tours2, lens2, feats2, vis2, counts1 = self._expand(
            tours1, lens1, feats1, vis1, keep_tours=True
        )
        starts1 = np.zeros(n1, dtype=np.int64)
        np.cumsum(counts1[:-1], out=starts1[1:])
        U2 = thetas[rows_h1] @ feats2.T
        V1 = np.maximum.reduceat(U2, starts1, axis=1)
        mask_h1 = horizons[rows_h1] == 1
        Q[rows_h1[mask_h1]] = V1[mask_h1]

        rows_h2 = np.flatnonzero(horizons == 2)
        if len(rows_h2) == 0:
            self._q_cache_put(key, Q)
            return Q

        pos_h2 = np.searchsorted(rows_h1, rows_h2)  # positions of h2 rows inside U2/V1
        theta2 = thetas[rows_h2]
        n2 = tours2.shape[0]
        # V1 of every level-2 node, for h2 rows, from leaf utilities (chunked)
        v1_of_2 = np.empty((len(rows_h2), n2))
        chunk = max(1, 100_000 // (arr.n + 1))
        for lo in range(0, n2, chunk):
            hi = min(lo + chunk, n2)
            leaf_feats, leaf_counts = self._expand(
                tours2[lo:hi], lens2[lo:hi], feats2[lo:hi], vis2[lo:hi], keep_tours=False
            )
            leaf_starts = np.zeros(hi - lo, dtype=np.int64)
            np.cumsum(leaf_counts[:-1], out=leaf_starts[1:])
            U3 = theta2 @ leaf_feats.T
            v1_of_2[:, lo:hi] = np.maximum.reduceat(U3, leaf_starts, axis=1)

        # beam over each level-1 node's children by immediate utility; the
        # NoOp child (first in every segment) is always retained
        U2_h2 = U2[pos_h2]
        for i in range(n1):
            seg = slice(starts1[i], starts1[i] + counts1[i])
            u_imm = U2_h2[:, seg]
            v_next = v1_of_2[:, seg]
            nc = u_imm.shape[1]
            if nc > beam_width:
                cut = np.partition(u_imm, nc - beam_width, axis=1)[:, nc - beam_width]
                keep = u_imm >= cut[:, None]
                keep[:, 0] = True
                Q[rows_h2, i] = np.where(keep, v_next, -np.inf).max(axis=1)
            else:
                Q[rows_h2, i] = v_next.max(axis=1)
        self._q_cache_put(key, Q)
        return Q

    def _expand(self, tours, lens, feats, vis, keep_tours: bool):
        cfg = self.config
        arr = self.city.arrays()
        n_nodes = tours.shape[0]
        cap = n_nodes * (arr.n + 1)
        out_counts = np.empty(n_nodes, dtype=np.int64)
        out_feats = np.empty((cap, arr.k + 2))
        if keep_tours:
            out_tours = np.full((cap, tours.shape[1]), -1, dtype=np.int64)
            out_lens = np.empty(cap, dtype=np.int64)
            out_vis = np.empty(cap)
            n_out = kernels.expand_level(
                tours, lens, feats, vis, arr.xs, arr.ys, arr.dist, arr.dur, arr.cost, arr.cat,
                cfg.duration_budget_h, cfg.walking_speed_kmh, cfg.closed,
                out_tours, out_lens, out_feats, out_vis, out_counts,
            )
            return (
                out_tours[:n_out],
                out_lens[:n_out],
                out_feats[:n_out],
                out_vis[:n_out],
                out_counts,
            )
        n_out = kernels.expand_leaf_features(
            tours, lens, feats, vis, arr.xs, arr.ys, arr.dist, arr.dur, arr.cost, arr.cat,
            cfg.duration_budget_h, cfg.walking_speed_kmh, cfg.closed,
            out_feats, out_counts,
        )
        return out_feats[:n_out], out_counts

    def _q_cache_put(self, key, value):
        if len(self._q_cache) >= 8:
            self._q_cache.clear()
        self._q_cache[key] = value

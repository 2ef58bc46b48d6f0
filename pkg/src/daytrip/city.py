"""Synthetic cities: points of interest, random generation, file I/O.

A city is the fixed ground a design session runs on: a set of POIs with
positions in kilometers, a category, a visit duration, and an entry cost.
Cities are written to a stable JSON document (schema "daytrip-city/1") so
the CLI, the HTTP service, and the UI all read the same files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CITY_SCHEMA = "daytrip-city/1"

#: Display labels used when n_categories == 5 (the default); category values
#: themselves are integer indices so any K works.
DEFAULT_CATEGORY_LABELS = ("museum", "gallery", "park", "landmark", "market")


@dataclass(frozen=True)
class CityConfig:
    size_km: float = 10.0
    n_categories: int = 5
    visit_duration_range: tuple[float, float] = (0.5, 2.5)
    entry_cost_range: tuple[float, float] = (0.0, 30.0)

    def __post_init__(self):
        if self.size_km <= 0:
            raise ValueError("size_km must be positive")
        if self.n_categories < 1:
            raise ValueError("need at least one category")
        lo, hi = self.visit_duration_range
        if not (0 < lo <= hi):
            raise ValueError("visit_duration_range must be positive and ordered")
        lo, hi = self.entry_cost_range
        if not (0 <= lo <= hi):
            raise ValueError("entry_cost_range must be non-negative and ordered")


@dataclass(frozen=True)
class PointOfInterest:
    id: int
    x_km: float
    y_km: float
    category: int
    visit_duration_h: float
    entry_cost: float

    def __post_init__(self):
        if self.visit_duration_h <= 0:
            raise ValueError(f"POI {self.id}: visit_duration_h must be > 0")
        if self.entry_cost < 0:
            raise ValueError(f"POI {self.id}: entry_cost must be >= 0")
        if self.category < 0:
            raise ValueError(f"POI {self.id}: category must be >= 0")


class CityArrays:
    """Column arrays over a city's POIs, in row order, for numeric kernels."""

    def __init__(self, pois: tuple[PointOfInterest, ...], n_categories: int):
        self.n = len(pois)
        self.k = n_categories
        self.xs = np.array([p.x_km for p in pois], dtype=np.float64)
        self.ys = np.array([p.y_km for p in pois], dtype=np.float64)
        self.dur = np.array([p.visit_duration_h for p in pois], dtype=np.float64)
        self.cost = np.array([p.entry_cost for p in pois], dtype=np.float64)
        self.cat = np.array([p.category for p in pois], dtype=np.int64)
        dx = self.xs[:, None] - self.xs[None, :]
        dy = self.ys[:, None] - self.ys[None, :]
        self.dist = np.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True)
class City:
    pois: tuple[PointOfInterest, ...]
    config: CityConfig = field(default_factory=CityConfig)
    seed: int | None = None

    def __post_init__(self):
        ids = [p.id for p in self.pois]
        if len(set(ids)) != len(ids):
            raise ValueError("POI ids must be unique")
        for p in self.pois:
            if p.category >= self.config.n_categories:
                raise ValueError(f"POI {p.id}: category {p.category} out of range")
        object.__setattr__(self, "_by_id", {p.id: p for p in self.pois})
        object.__setattr__(self, "_row_of", {p.id: i for i, p in enumerate(self.pois)})
        object.__setattr__(self, "_arrays", None)

    def __len__(self) -> int:
        return len(self.pois)

    def poi(self, poi_id: int) -> PointOfInterest:
        try:
            return self._by_id[poi_id]
        except KeyError:
            raise KeyError(f"unknown POI id {poi_id}") from None

    def __contains__(self, poi_id: int) -> bool:
        return poi_id in self._by_id

    def row_of(self, poi_id: int) -> int:
        return self._row_of[poi_id]

    def id_of(self, row: int) -> int:
        return self.pois[row].id

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.pois)

    def arrays(self) -> CityArrays:
        if self._arrays is None:
            object.__setattr__(self, "_arrays", CityArrays(self.pois, self.config.n_categories))
        return self._arrays

    def category_labels(self) -> tuple[str, ...]:
        if self.config.n_categories == len(DEFAULT_CATEGORY_LABELS):
            return DEFAULT_CATEGORY_LABELS
        return tuple(f"category-{i}" for i in range(self.config.n_categories))


def generate_city(n: int, seed, config: CityConfig | None = None) -> City:
    """Draw `n` POIs uniformly at random.

    Positions are uniform over a size_km x size_km square, categories uniform
    over the K labels, visit durations and entry costs uniform over their
    configured ranges. The draw order (positions, categories, durations,
    costs) is fixed, so a given seed always produces the same city.
    """
    if n < 1:
        raise ValueError(f"need at least one POI, got n={n}")
    config = config or CityConfig()
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, config.size_km, size=(n, 2))
    cats = rng.integers(0, config.n_categories, size=n)
    dlo, dhi = config.visit_duration_range
    durs = rng.uniform(dlo, dhi, size=n)
    clo, chi = config.entry_cost_range
    costs = rng.uniform(clo, chi, size=n)
    pois = tuple(
        PointOfInterest(
            id=i,
            x_km=float(xy[i, 0]),
            y_km=float(xy[i, 1]),
            category=int(cats[i]),
            visit_duration_h=float(durs[i]),
            entry_cost=float(costs[i]),
        )
        for i in range(n)
    )
    stored_seed = seed if isinstance(seed, int) else None
    return City(pois=pois, config=config, seed=stored_seed)


def city_to_dict(city: City) -> dict:
    return {
        "schema": CITY_SCHEMA,
        "size_km": city.config.size_km,
        "n_categories": city.config.n_categories,
        "visit_duration_range": list(city.config.visit_duration_range),
        "entry_cost_range": list(city.config.entry_cost_range),
        "seed": city.seed,
        "categories": list(city.category_labels()),
        "pois": [
            {
                "id": p.id,
                "x_km": p.x_km,
                "y_km": p.y_km,
                "category": p.category,
                "visit_duration_h": p.visit_duration_h,
                "entry_cost": p.entry_cost,
            }
            for p in city.pois
        ],
    }


def city_from_dict(doc: dict) -> City:
    if doc.get("schema") != CITY_SCHEMA:
        raise ValueError(f"unsupported city schema {doc.get('schema')!r}")
    config = CityConfig(
        size_km=doc["size_km"],
        n_categories=doc["n_categories"],
        visit_duration_range=tuple(doc["visit_duration_range"]),
        entry_cost_range=tuple(doc["entry_cost_range"]),
    )
    pois = tuple(
        PointOfInterest(
            id=int(rec["id"]),
            x_km=float(rec["x_km"]),
            y_km=float(rec["y_km"]),
            category=int(rec["category"]),
            visit_duration_h=float(rec["visit_duration_h"]),
            entry_cost=float(rec["entry_cost"]),
        )
        for rec in doc["pois"]
    )
    return City(pois=pois, config=config, seed=doc.get("seed"))


def save_city(city: City, path: str | Path) -> None:
    Path(path).write_text(json.dumps(city_to_dict(city), indent=2, sort_keys=True) + "\n")


def load_city(path: str | Path) -> City:
    return city_from_dict(json.loads(Path(path).read_text()))

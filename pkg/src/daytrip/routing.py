"""Objective tour ordering: exact below a size threshold, NN + 2-opt above.

This is what the system really does when a trip changes: re-order the chosen
POIs to minimize travel distance. Small subsets are solved exactly by subset
dynamic programming; larger ones get a nearest-neighbor construction from
every start (plus the caller-supplied order as a candidate) refined by 2-opt,
so the result never exceeds the length of the input order.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from . import kernels
from .city import City


def order_length_km(city: City, tour: Iterable[int], closed: bool) -> float:
    """Walk length of visiting `tour` (POI ids) in the given order."""
    arr = city.arrays()
    rows = np.array([city.row_of(i) for i in tour], dtype=np.int64)
    return float(kernels.tour_len(rows, len(rows), arr.dist, closed))


def route_optimal(
    city: City,
    poi_ids: Iterable[int],
    closed: bool = True,
    exact_threshold: int = 10,
) -> tuple[int, ...]:
    """Distance-minimizing visit order over a subset of POIs.

    If `poi_ids` is ordered, that order seeds the heuristic path, which keeps
    the output no longer than the input. Up to `exact_threshold` POIs the
    order is provably minimal for the configured tour mode (closed round trip
    or open path).
    """
    ids = list(poi_ids)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate POI ids in subset")
    n = len(ids)
    if n <= 1:
        return tuple(ids)
    arr = city.arrays()
    if n <= exact_threshold:
        rows = np.array(sorted(city.row_of(i) for i in ids), dtype=np.int64)
        order = kernels.held_karp(arr.dist, rows, closed)
        return tuple(city.id_of(int(r)) for r in order)
    given = np.array([city.row_of(i) for i in ids], dtype=np.int64)
    best = given.copy()
    best_len = kernels.tour_len(best, n, arr.dist, closed)
    for start in range(n):
        cand = kernels.nn_order(arr.dist, given, start)
        cand_len = kernels.tour_len(cand, n, arr.dist, closed)
        if cand_len < best_len:
            best, best_len = cand, cand_len
    kernels.two_opt(best, n, arr.dist, closed)
    return tuple(city.id_of(int(r)) for r in best)

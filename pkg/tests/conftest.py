import pytest

from daytrip.city import City, CityConfig, PointOfInterest, generate_city
from daytrip.core import ChangeKind
from daytrip.trip import TripConfig, TripDesign, TripProcess, TripUtilityParams
from daytrip.user_model import UserModelParams


@pytest.fixture(scope="session")
def small_city():
    return generate_city(8, seed=11)


@pytest.fixture()
def small_process(small_city):
    return TripProcess(small_city, TripConfig())


def make_poi(pid, x, y, category=0, duration=1.0, cost=0.0):
    return PointOfInterest(
        id=pid, x_km=x, y_km=y, category=category, visit_duration_h=duration, entry_cost=cost
    )


def make_city(pois, n_categories=5, size_km=10.0):
    return City(pois=tuple(pois), config=CityConfig(size_km=size_km, n_categories=n_categories))


def flat_utility(n_categories=5, cost_weight=0.0, pref=0.8, walk_penalty=0.2):
    return TripUtilityParams(cost_weight, (pref,) * n_categories, walk_penalty)


def model_params(beta=5.0, horizon=1):
    return UserModelParams(beta, beta, beta, horizon)


def random_valid_trip(process, rng, max_adds=6):
    """Random reachable state: a walk of random legal adds from empty."""
    trip = TripDesign()
    for _ in range(int(rng.integers(0, max_adds + 1))):
        adds = [c for c in process.legal_changes(trip) if c.kind == ChangeKind.ADD]
        if not adds:
            break
        trip = process.apply(trip, adds[int(rng.integers(len(adds)))])
    return trip


def pytest_addoption(parser):
    parser.addoption(
        "--skip-slow-acceptance",
        action="store_true",
        default=False,
        help="skip the long-running acceptance experiment (criterion 1)",
    )

"""Test-system construction and departure-sequence generation.

Two canonical systems: a 10-place/10-pod line for qualitative analysis and a
504-place/441-pod grid for realistic runs.  Departures are generated under
four uniformity regimes, all reproducible from a 64-bit seed via PCG64.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .core import CostModel, Instance, InvalidInstanceError, validate_instance

REGIME_RANDOM_GEOMETRIC = "random-geometric"
REGIME_RANDOM_UNIFORM = "random-uniform"
REGIME_PERIODIC_RANDOM = "periodic-random"
REGIME_PERIODIC = "periodic"

REGIMES = (REGIME_RANDOM_GEOMETRIC, REGIME_RANDOM_UNIFORM,
           REGIME_PERIODIC_RANDOM, REGIME_PERIODIC)


def rng_from_seed(seed: int) -> np.random.Generator:
    """The project-wide generator; PCG64 streams are stable across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


def geometric_weights(n_pods: int, ratio: float) -> list[float]:
    """Truncated-geometric pod weights with first/last weight ratio ``ratio``.

    w_h is proportional to q**h with q = ratio**(-1/(n_pods-1)), normalized
    to sum 1, so pod 1 is the most frequently used.
    """
    if n_pods < 1:
        raise ValueError("n_pods must be >= 1")
    if ratio < 1:
        raise ValueError("ratio must be >= 1")
    if n_pods == 1 or ratio == 1:
        return [1.0 / n_pods] * n_pods
    q = ratio ** (-1.0 / (n_pods - 1))
    raw = [q ** h for h in range(1, n_pods + 1)]
    total = sum(raw)
    return [w / total for w in raw]


def next_departure(storage_pods: Sequence[int], pod_weights: Sequence[float],
                   station_weights: Sequence[float],
                   rng: np.random.Generator) -> tuple[int, int]:
    """Sample one departure: station by weight, pod by weight among storage."""
    pods = sorted(storage_pods)
    if not pods:
        raise ValueError("storage is empty")
    station = int(rng.choice(len(station_weights), p=np.asarray(station_weights))) + 1
    w = np.array([pod_weights[h - 1] for h in pods], dtype=float)
    pod = pods[int(rng.choice(len(pods), p=w / w.sum()))]
    return pod, station


def co_simulated_departures(
        n_pods: int,
        station_capacities: Sequence[int],
        initial_storage: Sequence[Optional[int]],
        initial_queues: Sequence[Sequence[int]],
        n: int,
        draw: Callable[[int, set[int]], tuple[int, int]],
) -> tuple[tuple[int, int], ...]:
    """Build a departure sequence by co-simulating the (action-independent)
    storage membership and queue dynamics; ``draw(t, storage_set)`` must
    return a departure whose pod is in ``storage_set``."""
    in_storage = {h for h in initial_storage if h is not None}
    queues = [list(q) for q in initial_queues]
    departures: list[tuple[int, int]] = []
    for t in range(n):
        pod, station = draw(t, in_storage)
        if pod not in in_storage:
            raise InvalidInstanceError(f"draw at step {t} chose pod {pod} not in storage")
        in_storage.discard(pod)
        q = queues[station - 1]
        if len(q) < station_capacities[station - 1]:
            q.append(pod)
        else:
            in_storage.add(q.pop(0))
            q.append(pod)
        departures.append((pod, station))
    return tuple(departures)


def generate_departures(
        n_pods: int,
        station_capacities: Sequence[int],
        initial_storage: Sequence[Optional[int]],
        initial_queues: Sequence[Sequence[int]],
        regime: str,
        seed: int,
        n: int,
        pod_weights: Optional[Sequence[float]] = None,
        station_weights: Optional[Sequence[float]] = None,
) -> tuple[tuple[int, int], ...]:
    """Generate ``n`` departures under one of the four uniformity regimes."""
    n_stations = len(station_capacities)
    if station_weights is None:
        station_weights = [1.0 / n_stations] * n_stations

    if regime == REGIME_PERIODIC:
        return tuple(((t % n_pods) + 1, (t % n_stations) + 1) for t in range(n))

    rng = rng_from_seed(seed)
    sw = np.asarray(station_weights, dtype=float)

    if regime in (REGIME_RANDOM_GEOMETRIC, REGIME_RANDOM_UNIFORM):
        if regime == REGIME_RANDOM_UNIFORM or pod_weights is None:
            pod_weights = [1.0 / n_pods] * n_pods

        def draw(t: int, storage: set[int]) -> tuple[int, int]:
            return next_departure(storage, pod_weights, sw, rng)

        return co_simulated_departures(n_pods, station_capacities, initial_storage,
                                       initial_queues, n, draw)

    if regime == REGIME_PERIODIC_RANDOM:
        block: list[int] = []

        def draw(t: int, storage: set[int]) -> tuple[int, int]:
            nonlocal block
            while True:
                if not block:
                    block = list(rng.permutation(n_pods) + 1)
                pod = block[0]
                if pod in storage:
                    block.pop(0)
                    break
                # correction rule: swap with the next in-storage pod in the
                # block, skip to a fresh block when there is none
                for j in range(1, len(block)):
                    if block[j] in storage:
                        block[0], block[j] = block[j], block[0]
                        break
                else:
                    block = []
                    continue
                pod = block.pop(0)
                break
            station = int(rng.choice(n_stations, p=sw)) + 1
            return pod, station

        return co_simulated_departures(n_pods, station_capacities, initial_storage,
                                       initial_queues, n, draw)

    raise ValueError(f"unknown regime: {regime}")


# --- small test system -----------------------------------------------------

SMALL_N_PODS = 10
SMALL_N_PLACES = 10
SMALL_QUEUE_CAPACITY = 2
SMALL_WEIGHT_RATIO = 20.0


def small_cost_model() -> CostModel:
    """1-D line storage, two symmetric stations: cost(p, s) = p + 4 both ways."""
    to_station = tuple((float(p + 4), float(p + 4)) for p in range(1, SMALL_N_PLACES + 1))
    from_station = tuple(tuple(float(p + 4) for p in range(1, SMALL_N_PLACES + 1))
                         for _ in range(2))
    return CostModel(to_station=to_station, from_station=from_station)


def build_small_system(seed: int = 1, n: int = 1000,
                       regime: str = REGIME_RANDOM_GEOMETRIC) -> Instance:
    """The 10-place/10-pod system: pre-sorted pods, geometric ratio-20 weights,
    two symmetric stations of capacity 2, equal station weights."""
    initial_storage = tuple(range(1, SMALL_N_PODS + 1))
    initial_queues = ((), ())
    capacities = (SMALL_QUEUE_CAPACITY, SMALL_QUEUE_CAPACITY)
    departures = generate_departures(
        SMALL_N_PODS, capacities, initial_storage, initial_queues,
        regime=regime, seed=seed, n=n,
        pod_weights=geometric_weights(SMALL_N_PODS, SMALL_WEIGHT_RATIO),
        station_weights=(0.5, 0.5),
    )
    inst = Instance(
        n_pods=SMALL_N_PODS,
        n_places=SMALL_N_PLACES,
        station_capacities=capacities,
        costs=small_cost_model(),
        initial_storage=initial_storage,
        initial_queues=initial_queues,
        departures=departures,
    )
    validate_instance(inst)
    return inst


# --- medium test system ----------------------------------------------------

MEDIUM_N_PODS = 441
MEDIUM_GRID_W = 28
MEDIUM_GRID_H = 18
MEDIUM_N_PLACES = MEDIUM_GRID_W * MEDIUM_GRID_H
# stations sit below the grid at different columns and depths (asymmetric)
MEDIUM_STATIONS = ((5, 2), (21, 4))
MEDIUM_QUEUE_CAPACITY = 10
MEDIUM_STATION_WEIGHTS = (0.6, 0.4)


def medium_cost_model(grid_w: int = MEDIUM_GRID_W, grid_h: int = MEDIUM_GRID_H,
                      stations: Sequence[tuple[int, int]] = MEDIUM_STATIONS) -> CostModel:
    """Manhattan travel distances on the grid; place p-1 = y*grid_w + x."""
    to_rows = []
    for idx in range(grid_w * grid_h):
        x, y = idx % grid_w, idx // grid_w
        to_rows.append(tuple(float(abs(x - sx) + y + sy + 1) for sx, sy in stations))
    to_station = tuple(to_rows)
    from_station = tuple(tuple(to_station[p][s] for p in range(grid_w * grid_h))
                         for s in range(len(stations)))
    return CostModel(to_station=to_station, from_station=from_station)


def random_initial_storage(n_pods: int, n_places: int,
                           rng: np.random.Generator) -> tuple[Optional[int], ...]:
    places = rng.choice(n_places, size=n_pods, replace=False)
    storage: list[Optional[int]] = [None] * n_places
    for h, p in enumerate(places, start=1):
        storage[int(p)] = h
    return tuple(storage)


def build_medium_system(seed: int, n: int = 20000,
                        queue_capacity: int = MEDIUM_QUEUE_CAPACITY,
                        station_weights: Sequence[float] = MEDIUM_STATION_WEIGHTS,
                        ratio: float = 20.0,
                        regime: str = REGIME_RANDOM_GEOMETRIC) -> Instance:
    """The 504-place/441-pod system: asymmetric stations, random initial pod
    positions, geometric ratio-20 pod weights, station weights 0.6/0.4."""
    rng = rng_from_seed(seed)
    initial_storage = random_initial_storage(MEDIUM_N_PODS, MEDIUM_N_PLACES, rng)
    initial_queues = ((), ())
    capacities = (queue_capacity, queue_capacity)
    departures = generate_departures(
        MEDIUM_N_PODS, capacities, initial_storage, initial_queues,
        regime=regime, seed=seed + 1, n=n,
        pod_weights=geometric_weights(MEDIUM_N_PODS, ratio),
        station_weights=tuple(station_weights),
    )
    inst = Instance(
        n_pods=MEDIUM_N_PODS,
        n_places=MEDIUM_N_PLACES,
        station_capacities=capacities,
        costs=medium_cost_model(),
        initial_storage=initial_storage,
        initial_queues=initial_queues,
        departures=departures,
    )
    validate_instance(inst)
    return inst

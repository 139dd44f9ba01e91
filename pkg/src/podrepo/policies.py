"""Online repositioning policies: random, the three cheapest-place variants,
and the fixed-place policy with its offline assignment computation.

A policy is a callable ``decide(replay) -> action`` run against
:class:`~podrepo.core.Replay`; every returned action is admissible by
construction.  Ties between equally cheap places are always broken by the
smallest place id so replays are reproducible.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import NO_OP, Instance, Replay, Schedule, departure_schedule
from .instances import rng_from_seed

CHEAPEST_TO_STORAGE = "to-storage"
CHEAPEST_ON_AVERAGE = "avg"
CHEAPEST_DECISION = "decision"


def station_fractions(inst: Instance) -> list[float]:
    """Empirical fraction of departures per station."""
    counts = [0] * inst.n_stations
    for _, s in inst.departures:
        counts[s - 1] += 1
    n = max(len(inst.departures), 1)
    return [c / n for c in counts]


def avg_costs(inst: Instance) -> list[float]:
    """Per-place round-trip cost averaged over the empirical station mix."""
    r = station_fractions(inst)
    return [sum((inst.costs.to_stn(p, s) + inst.costs.from_stn(s, p)) * r[s - 1]
                for s in range(1, inst.n_stations + 1))
            for p in range(1, inst.n_places + 1)]


def decision_cost(inst: Instance, place: int, from_station: int,
                  to_station: Optional[int]) -> float:
    """Return-leg cost plus the next-departure leg when the destination is known."""
    cost = inst.costs.from_stn(from_station, place)
    if to_station is not None:
        cost += inst.costs.to_stn(place, to_station)
    return cost


class RandomPolicy:
    """Uniform choice among the admissible free places."""

    name = "random"

    def __init__(self, seed: int = 0):
        self.rng = rng_from_seed(seed)

    def __call__(self, replay: Replay) -> int:
        actions = replay.admissible()
        if actions == [NO_OP]:
            return NO_OP
        return actions[int(self.rng.integers(len(actions)))]


class CheapestPolicy:
    """Cheapest available place under one of three cost notions.

    ``to-storage`` uses only the return leg, ``avg`` ranks places by their
    average round-trip cost, ``decision`` adds the known next-destination leg.
    """

    def __init__(self, inst: Instance, variant: str = CHEAPEST_DECISION):
        if variant not in (CHEAPEST_TO_STORAGE, CHEAPEST_ON_AVERAGE, CHEAPEST_DECISION):
            raise ValueError(f"unknown cheapest-place variant: {variant}")
        self.variant = variant
        self.name = f"cheapest:{variant}"
        self._avg = avg_costs(inst) if variant == CHEAPEST_ON_AVERAGE else None

    def __call__(self, replay: Replay) -> int:
        actions = replay.admissible()
        if actions == [NO_OP]:
            return NO_OP
        inst = replay.inst
        info = replay.current
        if self.variant == CHEAPEST_TO_STORAGE:
            key = lambda p: inst.costs.from_stn(info.station, p)
        elif self.variant == CHEAPEST_ON_AVERAGE:
            key = lambda p: self._avg[p - 1]
        else:
            key = lambda p: decision_cost(inst, p, info.station, info.return_next_station)
        return min(actions, key=lambda p: (key(p), p))


def station_frequencies(inst: Instance,
                        schedule: Optional[Schedule] = None) -> tuple[list[list[int]], list[list[int]]]:
    """Per pod and station: departure counts and return counts, both derived
    from the departure sequence alone."""
    if schedule is None:
        schedule = departure_schedule(inst)
    f_to = [[0] * inst.n_stations for _ in range(inst.n_pods)]
    f_from = [[0] * inst.n_stations for _ in range(inst.n_pods)]
    for info in schedule.steps:
        f_to[info.pod - 1][info.station - 1] += 1
        if not info.fill:
            f_from[info.returning_pod - 1][info.station - 1] += 1
    return f_to, f_from


def fixed_assignment_costs(inst: Instance,
                           schedule: Optional[Schedule] = None) -> np.ndarray:
    """Cost of permanently assigning pod h to place p (pods x places)."""
    f_to, f_from = station_frequencies(inst, schedule)
    matrix = np.zeros((inst.n_pods, inst.n_places))
    for h in range(inst.n_pods):
        for p in range(1, inst.n_places + 1):
            matrix[h, p - 1] = sum(
                f_to[h][s - 1] * inst.costs.to_stn(p, s)
                + f_from[h][s - 1] * inst.costs.from_stn(s, p)
                for s in range(1, inst.n_stations + 1))
    return matrix


def compute_fixed_assignment(inst: Instance,
                             schedule: Optional[Schedule] = None) -> dict[int, int]:
    """Optimal injective pod-to-place mapping, solved as a rectangular
    assignment problem."""
    if inst.n_pods > inst.n_places:
        raise ValueError("more pods than places: fixed assignment infeasible")
    matrix = fixed_assignment_costs(inst, schedule)
    rows, cols = linear_sum_assignment(matrix)
    return {int(h) + 1: int(p) + 1 for h, p in zip(rows, cols)}


def sorted_fixed_assignment(inst: Instance,
                            schedule: Optional[Schedule] = None) -> dict[int, int]:
    """Sort-based shortcut: pods by usage frequency, places by average cost,
    paired index by index.  Optimal when all pods share the station mix."""
    if schedule is None:
        schedule = departure_schedule(inst)
    freq = [len(schedule.pod_departure_steps[h - 1]) for h in range(1, inst.n_pods + 1)]
    pods = sorted(range(1, inst.n_pods + 1), key=lambda h: (-freq[h - 1], h))
    avg = avg_costs(inst)
    places = sorted(range(1, inst.n_places + 1), key=lambda p: (avg[p - 1], p))
    return {h: p for h, p in zip(pods, places)}


def rearranged_instance(inst: Instance, assignment: dict[int, int]) -> Instance:
    """The instance with its initial storage rewritten so every stored pod sits
    at its assigned place.  This pre-game rearrangement is cost-free, mirroring
    how fixed-place results are reported (not directly comparable)."""
    storage: list[Optional[int]] = [None] * inst.n_places
    for h in inst.initial_storage:
        if h is not None:
            storage[assignment[h] - 1] = h
    from dataclasses import replace
    return replace(inst, initial_storage=tuple(storage))


class FixedPolicy:
    """Always send a pod back to its assigned place.

    Requires an initial state consistent with the assignment, see
    :func:`rearranged_instance`."""

    name = "fixed"

    def __init__(self, assignment: dict[int, int]):
        self.assignment = assignment

    def __call__(self, replay: Replay) -> int:
        info = replay.current
        if info.fill:
            return NO_OP
        place = self.assignment[info.returning_pod]
        if replay.pod_at[place] != 0 and replay.pod_at[place] != info.pod:
            raise ValueError(
                f"assigned place {place} busy: initial state not consistent "
                f"with the fixed assignment")
        return place

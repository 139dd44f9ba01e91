"""The tetris heuristic.

Start from a most-expensive-place replay (leaving the cheap places free),
then sweep the occupation intervals once -- in pod-frequency or in
interval-duration order -- and drop each interval onto the cheapest strictly
cheaper place that is free for its whole time span.  Interval time spans are
fixed by the departure sequence; only the place coordinate moves.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from typing import Optional

from .core import (NO_OP, Instance, OccupationInterval, Replay, Schedule,
                   departure_schedule, occupation_intervals)
from .policies import decision_cost

SORT_FREQUENCY = "frequency"
SORT_DURATION = "duration"


def interval_place_cost(inst: Instance, interval: OccupationInterval,
                        place: Optional[int] = None) -> float:
    """Decision cost of hosting ``interval`` at ``place`` (defaults to its
    current place); independent of the interval length."""
    p = interval.place if place is None else place
    if interval.from_station is None:
        raise ValueError("initial-occupancy intervals carry no decision cost")
    return decision_cost(inst, p, interval.from_station, interval.to_station)


class MostExpensivePlacePolicy:
    """Reverse cheapest-place: argmax of the decision cost, ties to the
    smallest place id."""

    name = "most-expensive"

    def __call__(self, replay: Replay) -> int:
        actions = replay.admissible()
        if actions == [NO_OP]:
            return NO_OP
        inst = replay.inst
        info = replay.current
        return max(actions,
                   key=lambda p: (decision_cost(inst, p, info.station,
                                                info.return_next_station), -p))


class _Timeline:
    """Per-place sorted interval sets with binary-search free-slot queries."""

    def __init__(self, n_places: int):
        self.spans: list[list[tuple[int, int]]] = [[] for _ in range(n_places + 1)]

    def add(self, place: int, begin: int, end: int) -> None:
        insort(self.spans[place], (begin, end))

    def remove(self, place: int, begin: int, end: int) -> None:
        spans = self.spans[place]
        spans.pop(bisect_left(spans, (begin, end)))

    def free(self, place: int, begin: int, end: int) -> bool:
        spans = self.spans[place]
        i = bisect_right(spans, (begin,))
        if i > 0 and spans[i - 1][1] > begin:
            return False
        return i >= len(spans) or spans[i][0] >= end


def tetris(inst: Instance, mode: str = SORT_FREQUENCY,
           schedule: Optional[Schedule] = None) -> tuple[list[int], float]:
    """Run the heuristic; returns the action sequence and its total cost."""
    if mode not in (SORT_FREQUENCY, SORT_DURATION):
        raise ValueError(f"unknown tetris mode: {mode}")
    if schedule is None:
        schedule = departure_schedule(inst)

    replay = Replay(inst, schedule).run(MostExpensivePlacePolicy())
    actions = list(replay.actions)
    total = replay.total

    intervals = occupation_intervals(inst, actions, schedule)
    timeline = _Timeline(inst.n_places)
    for iv in intervals:
        timeline.add(iv.place, iv.begin, iv.end)

    movable = [iv for iv in intervals if iv.decision_step is not None]
    if mode == SORT_FREQUENCY:
        freq = [len(d) for d in schedule.pod_departure_steps]
        movable.sort(key=lambda iv: (-freq[iv.pod - 1], iv.begin, iv.pod))
    else:
        movable.sort(key=lambda iv: (iv.end - iv.begin, iv.begin, iv.pod))

    # place ids pre-sorted by decision cost for each (from, to) combination
    order_cache: dict[tuple[int, Optional[int]], list[int]] = {}

    def place_order(s_from: int, s_to: Optional[int]) -> list[int]:
        key = (s_from, s_to)
        if key not in order_cache:
            order_cache[key] = sorted(
                range(1, inst.n_places + 1),
                key=lambda p: (decision_cost(inst, p, s_from, s_to), p))
        return order_cache[key]

    for iv in movable:
        here = interval_place_cost(inst, iv)
        current_place = iv.place
        for p in place_order(iv.from_station, iv.to_station):
            cost = interval_place_cost(inst, iv, p)
            if cost >= here:
                break
            if timeline.free(p, iv.begin, iv.end):
                timeline.remove(current_place, iv.begin, iv.end)
                timeline.add(p, iv.begin, iv.end)
                actions[iv.begin - 1] = p
                total += cost - here
                iv = OccupationInterval(place=p, pod=iv.pod, begin=iv.begin,
                                        end=iv.end, from_station=iv.from_station,
                                        to_station=iv.to_station,
                                        decision_step=iv.decision_step)
                break
    return actions, total

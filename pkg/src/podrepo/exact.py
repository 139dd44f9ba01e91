"""Exact optimization of the repositioning game.

The full-horizon problem is solved by depth-first branch and bound over the
decision tree, which is equivalent to the 0/1 integer program over placement
variables (the program encodes exactly the feasible action sequences).  The
windowed variant solves each time window exactly and carries busy-ends
forward; the integer model itself can be exported in LP text format for
verification with an external solver.

Cost bookkeeping: the to-station legs of pods that start in storage are fixed
by the departure sequence (``base_cost``); every decision then contributes
its return leg plus, when the placed pod departs again, the to-station leg of
that next departure.  The sum equals the stepwise game cost, which the test
suite cross-checks.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (NO_OP, Instance, Schedule, departure_schedule,
                   initial_busy_ends)


@dataclass(frozen=True)
class BipParameters:
    """Interval-view parameters of the placement program.

    Keyed by decision step: the station the placed pod comes from, its busy
    interval ``[busy_start, busy_end)`` and its next destination (``None``
    when it stays).  ``initial_busy_end[p-1]`` is the first time place ``p``
    becomes free; ``base_cost`` collects the uninfluenceable to-station legs.
    """

    decision_steps: tuple[int, ...]
    from_station: dict[int, int]
    busy_start: dict[int, int]
    busy_end: dict[int, int]
    to_station: dict[int, Optional[int]]
    initial_busy_end: tuple[int, ...]
    big_m: int
    base_cost: float


def derive_bip_parameters(inst: Instance,
                          schedule: Optional[Schedule] = None) -> BipParameters:
    if schedule is None:
        schedule = departure_schedule(inst)
    horizon = inst.horizon
    decision_steps = []
    from_station: dict[int, int] = {}
    busy_start: dict[int, int] = {}
    busy_end: dict[int, int] = {}
    to_station: dict[int, Optional[int]] = {}
    for t, info in enumerate(schedule.steps):
        if info.fill:
            continue
        decision_steps.append(t)
        from_station[t] = info.station
        busy_start[t] = t + 1
        busy_end[t] = (info.return_next_step + 1
                       if info.return_next_step is not None else horizon + 1)
        to_station[t] = info.return_next_station
    base = 0.0
    for p, h in enumerate(inst.initial_storage, start=1):
        if h is None:
            continue
        deps = schedule.pod_departure_steps[h - 1]
        if deps:
            base += inst.costs.to_stn(p, inst.departures[deps[0]][1])
    return BipParameters(
        decision_steps=tuple(decision_steps),
        from_station=from_station,
        busy_start=busy_start,
        busy_end=busy_end,
        to_station=to_station,
        initial_busy_end=tuple(initial_busy_ends(inst, schedule)),
        big_m=horizon + 2,
        base_cost=base,
    )


def decision_weights(inst: Instance, params: BipParameters) -> dict[int, list[float]]:
    """Per decision step: cost of choosing each place (index p-1)."""
    weights: dict[int, list[float]] = {}
    for t in params.decision_steps:
        s_from = params.from_station[t]
        s_to = params.to_station[t]
        row = []
        for p in range(1, inst.n_places + 1):
            w = inst.costs.from_stn(s_from, p)
            if s_to is not None:
                w += inst.costs.to_stn(p, s_to)
            row.append(w)
        weights[t] = row
    return weights


@dataclass
class SolveResult:
    actions: list[int]
    cost: float
    optimal: bool
    nodes: int
    lower_bound: float


class _Search:
    """Depth-first branch and bound over one step segment.

    The admissible lower bound relaxes place-disjointness: every remaining
    decision is charged its cheapest place over all places.  Equal-cost optima
    are resolved to the lexicographically smallest action sequence, so pruning
    is strict (bound > incumbent).
    """

    def __init__(self, inst: Instance, schedule: Schedule,
                 weights: dict[int, list[float]], start: int, end: int,
                 pod_at: list[int], place_of: list[int],
                 node_budget: Optional[int]):
        self.inst = inst
        self.steps = schedule.steps
        self.weights = weights
        self.start = start
        self.end = end
        self.pod_at = pod_at
        self.place_of = place_of
        self.node_budget = node_budget
        self.nodes = 0
        self.exhausted = False
        self.best_cost: Optional[float] = None
        self.best_path: Optional[list[int]] = None
        self.path: list[int] = []
        # suffix of per-decision minima, indexed from segment start
        self.suffix = [0.0] * (end - start + 1)
        for t in range(end - 1, start - 1, -1):
            extra = min(weights[t]) if not self.steps[t].fill else 0.0
            self.suffix[t - start] = self.suffix[t - start + 1] + extra

    def seed(self, actions: Sequence[int], cost: float) -> None:
        self.best_cost = cost
        self.best_path = list(actions)

    def run(self) -> None:
        sys.setrecursionlimit(max(10000, 4 * (self.end - self.start) + 1000))
        self._rec(self.start, 0.0)

    def _rec(self, t: int, g: float) -> None:
        if self.exhausted:
            return
        if t == self.end:
            if (self.best_cost is None or g < self.best_cost
                    or (g == self.best_cost and self.path < self.best_path)):
                self.best_cost = g
                self.best_path = list(self.path)
            return
        info = self.steps[t]
        pod_at, place_of = self.pod_at, self.place_of
        dep_place = place_of[info.pod]
        pod_at[dep_place] = 0
        place_of[info.pod] = 0
        try:
            if info.fill:
                self.path.append(NO_OP)
                self._rec(t + 1, g)
                self.path.pop()
                return
            self.nodes += 1
            if self.node_budget is not None and self.nodes > self.node_budget:
                self.exhausted = True
                return
            w = self.weights[t]
            children = sorted(
                (p for p in range(1, self.inst.n_places + 1) if pod_at[p] == 0),
                key=lambda p: (w[p - 1], p))
            tail = self.suffix[t - self.start + 1]
            ret = info.returning_pod
            for p in children:
                g2 = g + w[p - 1]
                if self.best_cost is not None and g2 + tail > self.best_cost:
                    break  # children are cost-sorted; the rest only get worse
                pod_at[p] = ret
                place_of[ret] = p
                self.path.append(p)
                self._rec(t + 1, g2)
                self.path.pop()
                pod_at[p] = 0
                place_of[ret] = 0
                if self.exhausted:
                    return
        finally:
            pod_at[dep_place] = info.pod
            place_of[info.pod] = dep_place


def _occupancy_arrays(inst: Instance) -> tuple[list[int], list[int]]:
    pod_at = [0] * (inst.n_places + 1)
    place_of = [0] * (inst.n_pods + 1)
    for p, h in enumerate(inst.initial_storage, start=1):
        if h is not None:
            pod_at[p] = h
            place_of[h] = p
    return pod_at, place_of


def _segment_cost(weights: dict[int, list[float]], schedule: Schedule,
                  actions: Sequence[int], start: int) -> float:
    total = 0.0
    for t, a in enumerate(actions, start=start):
        if not schedule.steps[t].fill:
            total += weights[t][a - 1]
    return total


def solve_exact(inst: Instance, node_budget: Optional[int] = None,
                warm_start: Optional[Sequence[int]] = None) -> SolveResult:
    """Minimize the total game cost with zero terminal cost.

    With an exhausted ``node_budget`` the best solution found so far is
    returned with ``optimal=False``; ``warm_start`` (a feasible action
    sequence) seeds the incumbent.
    """
    schedule = departure_schedule(inst)
    params = derive_bip_parameters(inst, schedule)
    weights = decision_weights(inst, params)
    pod_at, place_of = _occupancy_arrays(inst)
    search = _Search(inst, schedule, weights, 0, inst.horizon,
                     pod_at, place_of, node_budget)
    if warm_start is not None:
        search.seed(warm_start, _segment_cost(weights, schedule, warm_start, 0))
    search.run()
    if search.best_cost is None:
        raise RuntimeError("node budget exhausted before any solution was found")
    return SolveResult(
        actions=list(search.best_path),
        cost=params.base_cost + search.best_cost,
        optimal=not search.exhausted,
        nodes=search.nodes,
        lower_bound=params.base_cost + search.suffix[0],
    )


def solve_iterative(inst: Instance, window_size: int,
                    node_budget: Optional[int] = None) -> SolveResult:
    """Solve each window of ``window_size`` time steps exactly, carrying the
    occupancy (busy-end) state across window boundaries.  Decision costs keep
    the whole-horizon next-destination legs, so future placement costs flow
    into every window."""
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    schedule = departure_schedule(inst)
    params = derive_bip_parameters(inst, schedule)
    weights = decision_weights(inst, params)
    pod_at, place_of = _occupancy_arrays(inst)
    actions: list[int] = []
    total = params.base_cost
    nodes = 0
    optimal = True
    for start in range(0, inst.horizon, window_size):
        end = min(start + window_size, inst.horizon)
        search = _Search(inst, schedule, weights, start, end,
                         pod_at, place_of, node_budget)
        search.run()
        if search.best_cost is None:
            raise RuntimeError("node budget exhausted before any window solution")
        nodes += search.nodes
        optimal = optimal and not search.exhausted
        total += search.best_cost
        for t, a in enumerate(search.best_path, start=start):
            info = schedule.steps[t]
            pod_at[place_of[info.pod]] = 0
            place_of[info.pod] = 0
            if not info.fill:
                pod_at[a] = info.returning_pod
                place_of[info.returning_pod] = a
        actions.extend(search.best_path)
    return SolveResult(actions=actions, cost=total, optimal=optimal,
                       nodes=nodes, lower_bound=params.base_cost)


def export_bip(inst: Instance, path) -> None:
    """Write the 0/1 placement model in LP text format.

    Only the reduced busy-place constraints are emitted (previous decisions
    whose busy interval can still overlap the current arrival time).  The
    objective omits the constant ``base_cost``, noted in a comment.
    """
    schedule = departure_schedule(inst)
    params = derive_bip_parameters(inst, schedule)
    weights = decision_weights(inst, params)
    m = params.big_m
    lines = [
        "\\ pod repositioning placement model",
        f"\\ constant cost not in objective: {params.base_cost}",
        "Minimize",
    ]
    terms = []
    for t in params.decision_steps:
        for p in range(1, inst.n_places + 1):
            terms.append(f"{weights[t][p - 1]:g} x_{t}_{p}")
    lines.append(" obj: " + " + ".join(terms))
    lines.append("Subject To")
    for t in params.decision_steps:
        row = " + ".join(f"x_{t}_{p}" for p in range(1, inst.n_places + 1))
        lines.append(f" assign_{t}: {row} = 1")
    for t in params.decision_steps:
        arrive = params.busy_start[t]
        for p in range(1, inst.n_places + 1):
            e = params.initial_busy_end[p - 1]
            if e > arrive:
                lines.append(f" init_{t}_{p}: {m - arrive:g} x_{t}_{p} <= {m - e:g}")
    for i, t in enumerate(params.decision_steps):
        arrive = params.busy_start[t]
        for tau in params.decision_steps[:i]:
            if params.busy_end[tau] > arrive:
                for p in range(1, inst.n_places + 1):
                    lines.append(
                        f" prev_{tau}_{t}_{p}: {params.busy_end[tau]:g} x_{tau}_{p}"
                        f" + {m - arrive:g} x_{t}_{p} <= {m:g}")
    lines.append("Binary")
    for t in params.decision_steps:
        for p in range(1, inst.n_places + 1):
            lines.append(f" x_{t}_{p}")
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

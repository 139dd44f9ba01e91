"""Online policies and the fixed-place assignment."""

import itertools

import pytest

from podrepo import harness
from podrepo.core import Replay, check_feasible, departure_schedule
from podrepo.instances import build_small_system
from podrepo.policies import (CHEAPEST_DECISION, CHEAPEST_ON_AVERAGE,
                              CHEAPEST_TO_STORAGE, CheapestPolicy, FixedPolicy,
                              RandomPolicy, avg_costs, compute_fixed_assignment,
                              decision_cost, fixed_assignment_costs,
                              rearranged_instance, sorted_fixed_assignment,
                              station_fractions, station_frequencies)


class TestAvgCosts:
    def test_small_periodic_place_one(self):
        inst = build_small_system(n=100, regime="periodic")
        assert station_fractions(inst) == [0.5, 0.5]
        assert avg_costs(inst)[0] == 10.0

    def test_single_station_reduces_to_round_trip(self):
        inst = harness.build_tiny_random(11)
        if inst.n_stations != 1:
            inst = next(harness.build_tiny_random(s) for s in range(40)
                        if harness.build_tiny_random(s).n_stations == 1)
        avg = avg_costs(inst)
        for p in range(1, inst.n_places + 1):
            assert avg[p - 1] == inst.costs.to_stn(p, 1) + inst.costs.from_stn(1, p)


class TestRandomPolicy:
    def test_forced_choice(self):
        inst = build_small_system(n=50)
        replay = Replay(inst)
        policy = RandomPolicy(0)
        while not replay.done:
            action = policy(replay)
            assert action in replay.admissible()
            replay.step(action)

    def test_seed_determinism(self):
        inst = build_small_system(n=200)
        a = Replay(inst).run(RandomPolicy(7)).actions
        b = Replay(inst).run(RandomPolicy(7)).actions
        c = Replay(inst).run(RandomPolicy(8)).actions
        assert a == b
        assert a != c


class TestCheapestPolicy:
    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            CheapestPolicy(build_small_system(n=10), "psychic")

    def test_to_storage_picks_nearest(self):
        inst = build_small_system(n=100)
        replay = Replay(inst)
        policy = CheapestPolicy(inst, CHEAPEST_TO_STORAGE)
        while not replay.done:
            action = policy(replay)
            acts = replay.admissible()
            if acts != [0]:
                # cost grows with the place id, so the smallest id wins
                assert action == min(acts)
            replay.step(action)

    def test_decision_cost_without_future_leg(self):
        inst = build_small_system(n=10)
        assert decision_cost(inst, 3, 1, None) == inst.costs.from_stn(1, 3)
        assert decision_cost(inst, 3, 1, 2) == (inst.costs.from_stn(1, 3)
                                                + inst.costs.to_stn(3, 2))

    def test_variants_agree_on_small_system(self):
        inst = build_small_system()
        totals = [Replay(inst).run(CheapestPolicy(inst, v)).total
                  for v in (CHEAPEST_TO_STORAGE, CHEAPEST_ON_AVERAGE,
                            CHEAPEST_DECISION)]
        assert max(totals) - min(totals) < 1e-9


class TestStationFrequencies:
    def test_counts_match_departures(self):
        inst = harness.build_tiny_random(2)
        f_to, f_from = station_frequencies(inst)
        for h in range(1, inst.n_pods + 1):
            expected = sum(1 for hh, _ in inst.departures if hh == h)
            assert sum(f_to[h - 1]) == expected
        schedule = departure_schedule(inst)
        returns = sum(1 for info in schedule.steps if not info.fill)
        assert sum(map(sum, f_from)) == returns


class TestFixedAssignment:
    @pytest.mark.parametrize("seed", range(8))
    def test_matches_exhaustive_enumeration(self, seed):
        inst = harness.build_tiny_random(seed)
        matrix = fixed_assignment_costs(inst)
        best = min(sum(matrix[h, p] for h, p in enumerate(perm))
                   for perm in itertools.permutations(range(inst.n_places),
                                                      inst.n_pods))
        fa = compute_fixed_assignment(inst)
        assert sorted(fa) == list(range(1, inst.n_pods + 1))
        assert len(set(fa.values())) == inst.n_pods
        got = sum(matrix[h - 1, p - 1] for h, p in fa.items())
        assert got == pytest.approx(best, abs=1e-9)

    def test_single_pod_single_place(self):
        inst = harness.build_tiny_random(0)
        from dataclasses import replace
        small = replace(
            inst, n_pods=1, n_places=1,
            initial_storage=(1,), initial_queues=tuple(() for _ in
                                                       inst.station_capacities),
            departures=((1, 1),) * 0,
            costs=replace(inst.costs,
                          to_station=(inst.costs.to_station[0],),
                          from_station=tuple((row[0],) for row in
                                             inst.costs.from_station)))
        assert compute_fixed_assignment(small) == {1: 1}

    def test_more_pods_than_places_rejected(self):
        inst = harness.build_tiny_random(0)
        from dataclasses import replace
        bad = replace(inst, n_places=inst.n_pods - 1)
        with pytest.raises(ValueError):
            compute_fixed_assignment(bad)

    @pytest.mark.parametrize("seed", range(6))
    def test_sorted_shortcut_on_uniform_station_mix(self, seed):
        inst = harness.build_tiny_symmetric(4 + seed % 3, regime="periodic",
                                            seed=seed, n=8)
        matrix = fixed_assignment_costs(inst)
        opt = compute_fixed_assignment(inst)
        shortcut = sorted_fixed_assignment(inst)
        c_opt = sum(matrix[h - 1, p - 1] for h, p in opt.items())
        c_short = sum(matrix[h - 1, p - 1] for h, p in shortcut.items())
        assert c_short == pytest.approx(c_opt, abs=1e-9)

    def test_objective_beats_random_samples(self):
        import numpy as np
        inst = harness.build_tiny_random(9)
        matrix = fixed_assignment_costs(inst)
        fa = compute_fixed_assignment(inst)
        best = sum(matrix[h - 1, p - 1] for h, p in fa.items())
        rng = np.random.default_rng(0)
        for _ in range(300):
            perm = rng.permutation(inst.n_places)[:inst.n_pods]
            assert best <= sum(matrix[h, p] for h, p in enumerate(perm)) + 1e-9


class TestFixedPolicy:
    def test_rearranged_replay_is_feasible(self):
        inst = build_small_system(n=300)
        fa = compute_fixed_assignment(inst)
        arranged = rearranged_instance(inst, fa)
        replay = Replay(arranged).run(FixedPolicy(fa))
        assert check_feasible(arranged, replay.actions).ok
        decisions = [a for a in replay.actions if a != 0]
        schedule = departure_schedule(arranged)
        returned = [info.returning_pod for info in schedule.steps if not info.fill]
        assert decisions == [fa[h] for h in returned]

    def test_inconsistent_initial_state_detected(self):
        inst = build_small_system(n=300)
        fa = compute_fixed_assignment(inst)
        shifted = {h: (p % inst.n_places) + 1 for h, p in fa.items()}
        with pytest.raises(ValueError):
            Replay(inst).run(FixedPolicy(shifted))

"""Interval-moving heuristic and its most-expensive-place initialization."""

import pytest

from podrepo import harness
from podrepo.core import (Replay, check_feasible, departure_schedule,
                          occupation_intervals, total_cost)
from podrepo.instances import build_small_system
from podrepo.policies import CheapestPolicy, decision_cost
from podrepo.tetris import (SORT_DURATION, SORT_FREQUENCY,
                            MostExpensivePlacePolicy, _Timeline,
                            interval_place_cost, tetris)


class TestMostExpensivePlace:
    def test_argmax_of_decision_cost(self):
        inst = build_small_system(n=200)
        replay = Replay(inst)
        policy = MostExpensivePlacePolicy()
        while not replay.done:
            action = policy(replay)
            acts = replay.admissible()
            if acts != [0]:
                info = replay.current
                best = max(decision_cost(inst, p, info.station,
                                         info.return_next_station)
                           for p in acts)
                assert decision_cost(inst, action, info.station,
                                     info.return_next_station) == best
            replay.step(action)

    def test_keeps_cheap_places_free(self):
        inst = build_small_system(n=200)
        expensive = Replay(inst).run(MostExpensivePlacePolicy())
        cheap = Replay(inst).run(CheapestPolicy(inst))
        # place 1 is the cheapest; the reverse policy uses it less
        used_exp = sum(1 for a in expensive.actions if a == 1)
        used_cheap = sum(1 for a in cheap.actions if a == 1)
        assert used_exp < used_cheap


class TestTimeline:
    def test_free_slot_queries(self):
        tl = _Timeline(2)
        tl.add(1, 3, 7)
        tl.add(1, 10, 12)
        assert tl.free(1, 7, 10)
        assert tl.free(1, 0, 3)
        assert tl.free(1, 12, 99)
        assert not tl.free(1, 2, 4)
        assert not tl.free(1, 6, 8)
        assert not tl.free(1, 0, 99)
        tl.remove(1, 3, 7)
        assert tl.free(1, 2, 9)


class TestIntervalPlaceCost:
    def test_initial_interval_has_no_decision_cost(self):
        inst = build_small_system(n=50)
        replay = Replay(inst).run(CheapestPolicy(inst))
        ivs = occupation_intervals(inst, replay.actions)
        initial = next(iv for iv in ivs if iv.decision_step is None)
        with pytest.raises(ValueError):
            interval_place_cost(inst, initial)

    def test_length_independent(self):
        inst = build_small_system(n=50)
        replay = Replay(inst).run(CheapestPolicy(inst))
        ivs = [iv for iv in occupation_intervals(inst, replay.actions)
               if iv.decision_step is not None]
        for iv in ivs:
            expected = decision_cost(inst, iv.place, iv.from_station,
                                     iv.to_station)
            assert interval_place_cost(inst, iv) == expected


class TestTetris:
    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            tetris(harness.build_tiny_random(0), "alphabetical")

    @pytest.mark.parametrize("mode", [SORT_FREQUENCY, SORT_DURATION])
    @pytest.mark.parametrize("seed", range(6))
    def test_sandwich_between_optimum_and_init(self, mode, seed):
        inst = harness.build_tiny_random(seed)
        schedule = departure_schedule(inst)
        init = Replay(inst, schedule).run(MostExpensivePlacePolicy())
        _, optimum = harness.brute_force_optimum(inst, schedule=schedule)
        actions, cost = tetris(inst, mode, schedule)
        assert optimum - 1e-9 <= cost <= init.total + 1e-9

    @pytest.mark.parametrize("mode", [SORT_FREQUENCY, SORT_DURATION])
    def test_feasible_and_cost_consistent(self, mode):
        inst = build_small_system(n=400)
        actions, cost = tetris(inst, mode)
        assert check_feasible(inst, actions).ok
        assert total_cost(inst, actions) == pytest.approx(cost, abs=1e-9)

    def test_beats_cheapest_on_small_system(self):
        inst = build_small_system()
        _, cost = tetris(inst, SORT_FREQUENCY)
        cheapest = Replay(inst).run(CheapestPolicy(inst)).total
        assert cost < cheapest

    def test_modes_agree_under_full_symmetry(self):
        # periodic departures give every pod the same frequency, and with
        # three pods every decided interval also has the same length, so the
        # two sort orders process the intervals identically
        inst = harness.build_tiny_symmetric(3, regime="periodic", seed=0, n=8)
        schedule = departure_schedule(inst)
        a_freq, c_freq = tetris(inst, SORT_FREQUENCY, schedule)
        ivs = [iv for iv in occupation_intervals(inst, a_freq, schedule)
               if iv.decision_step is not None]
        lengths = {min(iv.end, inst.horizon + 1) - iv.begin for iv in ivs}
        assert len(lengths) == 1
        a_dur, c_dur = tetris(inst, SORT_DURATION, schedule)
        assert c_freq == pytest.approx(c_dur, abs=1e-12)
        assert a_freq == a_dur

    def test_truncated_tail_intervals_separate_the_modes(self):
        # with four pods the final cycle's intervals are cut off by the
        # horizon; their shorter effective lengths reorder the duration sort
        # while the frequency sort is unaffected
        inst = harness.build_tiny_symmetric(4, regime="periodic", seed=0, n=8)
        schedule = departure_schedule(inst)
        c_freq = tetris(inst, SORT_FREQUENCY, schedule)[1]
        c_dur = tetris(inst, SORT_DURATION, schedule)[1]
        _, optimum = harness.brute_force_optimum(inst, schedule=schedule)
        assert c_freq == optimum
        assert c_dur > c_freq

    def test_interval_plan_disjoint_after_moves(self):
        inst = build_small_system(n=400)
        actions, _ = tetris(inst, SORT_FREQUENCY)
        per_place = {}
        for iv in occupation_intervals(inst, actions):
            per_place.setdefault(iv.place, []).append((iv.begin, iv.end))
        for spans in per_place.values():
            spans.sort()
            for (b1, e1), (b2, e2) in zip(spans, spans[1:]):
                assert e1 <= b2

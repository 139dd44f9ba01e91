"""Branch-and-bound solver, windowed variant, model export."""

import numpy as np
import pytest

from podrepo import harness
from podrepo.core import Replay, check_feasible, departure_schedule, total_cost
from podrepo.exact import (decision_weights, derive_bip_parameters, export_bip,
                           solve_exact, solve_iterative)
from podrepo.instances import build_small_system
from podrepo.policies import CHEAPEST_DECISION, CheapestPolicy, RandomPolicy


class TestCostDecomposition:
    """base_cost plus per-decision weights must equal the stepwise game cost."""

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_replay_total(self, seed):
        inst = harness.build_tiny_random(seed)
        schedule = departure_schedule(inst)
        params = derive_bip_parameters(inst, schedule)
        weights = decision_weights(inst, params)
        replay = Replay(inst, schedule).run(RandomPolicy(seed))
        decomposed = params.base_cost + sum(
            weights[t][a - 1] for t, a in enumerate(replay.actions)
            if not schedule.steps[t].fill)
        assert decomposed == pytest.approx(replay.total, abs=1e-9)

    def test_matches_on_small_system(self):
        inst = build_small_system(n=400)
        schedule = departure_schedule(inst)
        params = derive_bip_parameters(inst, schedule)
        weights = decision_weights(inst, params)
        replay = Replay(inst, schedule).run(CheapestPolicy(inst))
        decomposed = params.base_cost + sum(
            weights[t][a - 1] for t, a in enumerate(replay.actions)
            if not schedule.steps[t].fill)
        assert decomposed == pytest.approx(replay.total, abs=1e-9)

    def test_busy_intervals_describe_next_departures(self):
        inst = harness.build_tiny_random(1)
        params = derive_bip_parameters(inst)
        for t in params.decision_steps:
            assert params.busy_start[t] == t + 1
            assert params.busy_end[t] > params.busy_start[t]
            assert params.busy_end[t] <= inst.horizon + 1


class TestSolveExact:
    @pytest.mark.parametrize("seed", range(12))
    def test_agrees_with_brute_force(self, seed):
        inst = harness.build_tiny_random(seed)
        brute_actions, brute_cost = harness.brute_force_optimum(inst)
        result = solve_exact(inst)
        assert result.optimal
        assert result.cost == brute_cost
        assert result.actions == brute_actions
        assert result.lower_bound <= result.cost + 1e-9

    def test_cost_recomputes_under_replay(self):
        inst = harness.build_tiny_random(3)
        result = solve_exact(inst)
        assert check_feasible(inst, result.actions).ok
        assert total_cost(inst, result.actions) == pytest.approx(result.cost,
                                                                 abs=1e-9)

    def test_warm_start_caps_the_result(self):
        inst = build_small_system(n=200)
        warm = Replay(inst).run(CheapestPolicy(inst)).actions
        warm_cost = total_cost(inst, warm)
        result = solve_exact(inst, node_budget=2000, warm_start=warm)
        assert result.cost <= warm_cost + 1e-9
        assert not result.optimal

    def test_budget_exhaustion_flagged(self):
        inst = build_small_system(n=300)
        result = solve_exact(inst, node_budget=500)
        assert not result.optimal
        assert check_feasible(inst, result.actions).ok


class TestSolveIterative:
    @pytest.mark.parametrize("seed", range(8))
    def test_single_window_equals_exact(self, seed):
        inst = harness.build_tiny_random(seed)
        exact = solve_exact(inst)
        windowed = solve_iterative(inst, inst.horizon)
        assert windowed.actions == exact.actions
        assert windowed.cost == pytest.approx(exact.cost, abs=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_unit_window_equals_greedy(self, seed):
        inst = harness.build_tiny_random(seed)
        greedy = Replay(inst).run(CheapestPolicy(inst, CHEAPEST_DECISION))
        windowed = solve_iterative(inst, 1)
        assert windowed.actions == greedy.actions
        assert windowed.cost == pytest.approx(greedy.total, abs=1e-9)

    def test_window_size_validation(self):
        with pytest.raises(ValueError):
            solve_iterative(harness.build_tiny_random(0), 0)

    def test_intermediate_window_feasible(self):
        inst = build_small_system(n=300)
        result = solve_iterative(inst, 7)
        assert check_feasible(inst, result.actions).ok
        assert total_cost(inst, result.actions) == pytest.approx(result.cost,
                                                                 abs=1e-9)


def _solve_lp_model(inst):
    """Independent optimum of the exported model via mixed-integer scipy."""
    from scipy.optimize import LinearConstraint, milp

    schedule = departure_schedule(inst)
    params = derive_bip_parameters(inst, schedule)
    weights = decision_weights(inst, params)
    steps = list(params.decision_steps)
    n_p = inst.n_places
    index = {(t, p): i * n_p + (p - 1) for i, t in enumerate(steps)
             for p in range(1, n_p + 1)}
    c = np.array([weights[t][p - 1] for t in steps for p in range(1, n_p + 1)])
    rows, lb, ub = [], [], []
    for t in steps:
        row = np.zeros(len(c))
        for p in range(1, n_p + 1):
            row[index[(t, p)]] = 1.0
        rows.append(row)
        lb.append(1.0)
        ub.append(1.0)
    m = params.big_m
    for t in steps:
        arrive = params.busy_start[t]
        for p in range(1, n_p + 1):
            e = params.initial_busy_end[p - 1]
            if e > arrive:
                row = np.zeros(len(c))
                row[index[(t, p)]] = m - arrive
                rows.append(row)
                lb.append(-np.inf)
                ub.append(m - e)
    for i, t in enumerate(steps):
        arrive = params.busy_start[t]
        for tau in steps[:i]:
            if params.busy_end[tau] > arrive:
                for p in range(1, n_p + 1):
                    row = np.zeros(len(c))
                    row[index[(tau, p)]] = params.busy_end[tau]
                    row[index[(t, p)]] = m - arrive
                    rows.append(row)
                    lb.append(-np.inf)
                    ub.append(m)
    res = milp(c, constraints=LinearConstraint(np.array(rows), lb, ub),
               integrality=np.ones(len(c)), bounds=(0, 1))
    assert res.success
    return params.base_cost + res.fun


class TestModelExport:
    @pytest.mark.parametrize("seed", range(4))
    def test_external_solver_agreement(self, seed):
        inst = harness.build_tiny_random(seed)
        assert _solve_lp_model(inst) == pytest.approx(solve_exact(inst).cost,
                                                      abs=1e-6)

    def test_lp_file_structure(self, tmp_path):
        inst = harness.build_tiny_random(0)
        path = tmp_path / "model.lp"
        export_bip(inst, path)
        text = path.read_text()
        for section in ("Minimize", "Subject To", "Binary", "End"):
            assert section in text
        params = derive_bip_parameters(inst)
        for t in params.decision_steps:
            assert f"assign_{t}:" in text
        n_vars = len(params.decision_steps) * inst.n_places
        assert sum(line.startswith(" x_") for line in text.splitlines()) == n_vars

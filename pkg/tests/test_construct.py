import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import build_instance, greedy_solution, make_instance, scrambled_solution
from trsp.audit import audit
from trsp.construct import (best_insertion, best_insertion_naive, removal_repair_perturbation,
                            removal_saving, route_insertions, sequence_length,
                            sequence_related_removal, shaw_relatedness, worst_removal,
                            random_removal)
from trsp.route_eval import Solution


@pytest.mark.parametrize("scope", ["global", "route"])
@pytest.mark.parametrize("criterion", ["duration", "travel"])
def test_heap_insertion_equals_naive(scope, criterion):
    for seed in range(8):
        inst = make_instance(14, 3, seed, tool_density=0.3)
        a, b = Solution(inst), Solution(inst)
        ua = best_insertion(a, range(inst.N), criterion, scope)
        ub = best_insertion_naive(b, range(inst.N), criterion, scope)
        assert ua == ub
        assert a.signature() == b.signature()


@given(st.integers(0, 500))
@settings(max_examples=25)
def test_leftover_tasks_have_no_feasible_insertion(seed):
    inst = make_instance(12, 2, seed, tw_width=(20, 120))
    sol = Solution(inst)
    left = best_insertion(sol, range(inst.N))
    assert audit(sol).feasible
    assert left == sorted(sol.unscheduled)
    for t in left:
        for k in inst.compat[t]:
            assert next(route_insertions(sol, k, t, "duration"), None) is None
            assert next(route_insertions(sol, k, t, "duration", True), None) is None


def test_depot_fallback_used_for_missing_tool():
    tasks = [dict(x=10, y=0, e=0, l=500, s=5, tools=(True,))]
    inst = build_instance(tasks, [dict(x=0, y=0, tools=(False,))], central=(5.0, 0.0))
    sol = Solution(inst)
    assert best_insertion(sol, [0], depot_scope="global") == []
    assert sol.routes[0].visits == [1, 0, 2, 1]


def test_route_scope_prefers_cheaper_depot_route():
    # technician 0 can do the task directly but far away; technician 1 sits next to it
    # and only lacks the tool, the central depot being on its way
    tasks = [dict(x=10, y=0, e=0, l=500, tools=(True,))]
    techs = [dict(x=-40, y=0), dict(x=8, y=0, tools=(False,))]
    inst = build_instance(tasks, techs, central=(9.0, 0.0))
    g, r = Solution(inst), Solution(inst)
    best_insertion(g, [0], depot_scope="global")
    best_insertion(r, [0], depot_scope="route")
    assert g.where[0] == 0
    assert r.where[0] == 1 and r.routes[1].visits == [2, 0, 3, 2]
    assert r.fitness < g.fitness
    with pytest.raises(ValueError):
        best_insertion(Solution(inst), [0], depot_scope="nowhere")


def test_worst_removal_picks_the_detour():
    tasks = [dict(x=1, y=0, e=0, l=500), dict(x=2, y=0, e=0, l=500), dict(x=2, y=30, e=0, l=500)]
    inst = build_instance(tasks, [dict(x=0, y=0)])
    sol = Solution.from_visits(inst, [[1, 2, 3, 4, 1]])
    assert removal_saving(sol, 2, "duration")[1] > removal_saving(sol, 0, "duration")[1]
    assert worst_removal(sol, 1) == [2]
    assert sol.routes[0].visits == [1, 2, 3, 1]
    with pytest.raises(ValueError):
        worst_removal(sol, 0)


def test_worst_removal_ties_lowest_id():
    tasks = [dict(x=0, y=5, e=0, l=500), dict(x=0, y=-5, e=0, l=500)]
    inst = build_instance(tasks, [dict(x=0, y=0)])
    sol = Solution.from_visits(inst, [[1, 2, 3, 1]])
    assert worst_removal(sol, 1, "travel") == [0]


def test_shaw_relatedness_properties():
    inst = make_instance(10, 2, 3)
    for i in range(inst.N):
        for j in range(inst.N):
            if i != j:
                r = shaw_relatedness(inst, i, j)
                assert r >= 0 and r == pytest.approx(shaw_relatedness(inst, j, i))
                assert r <= 2 + 1e-9
    with pytest.raises(ValueError):
        shaw_relatedness(inst, 1, 1)


def test_sequence_length_rule():
    assert [sequence_length(d) for d in (1, 3, 5, 6, 9, 30)] == [3, 3, 3, 4, 5, 6]


@given(st.integers(0, 300), st.integers(1, 9))
@settings(max_examples=40)
def test_sequence_removal_blocks(seed, d):
    inst = make_instance(16, 4, seed)
    sol = greedy_solution(inst)
    before = {r.k: r.visits[:] for r in sol.routes}
    trace = []
    removed = sequence_related_removal(sol, d, random.Random(seed), 3, trace=trace)
    assert len(removed) == len(set(removed)) <= d
    routes = [k for k, _ in trace]
    assert len(routes) == len(set(routes))
    for k, block in trace:
        nodes = [inst.task_node(t) for t in block]
        v = before[k]
        i = v.index(nodes[0])
        assert v[i:i + len(nodes)] == nodes
        assert len(block) <= 3
    assert set(removed) <= sol.unscheduled
    assert not sol.check()


@given(st.integers(0, 300), st.integers(1, 8))
@settings(max_examples=30)
def test_perturbation_keeps_partition(seed, d_max):
    inst = make_instance(12, 3, seed)
    sol = scrambled_solution(inst, seed)
    removal_repair_perturbation(sol, d_max, "duration", random.Random(seed))
    a = audit(sol)
    assert a.feasible, a.problems
    assert not sol.check()


def test_random_removal_count():
    inst = make_instance(10, 2, 1)
    sol = greedy_solution(inst)
    n = sol.n_scheduled()
    out = random_removal(sol, 4, random.Random(0))
    assert len(out) == min(4, n) and sol.n_scheduled() == n - len(out)

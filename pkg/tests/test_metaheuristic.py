import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import greedy_solution, make_instance, scrambled_solution
from trsp import search_ops as so
from trsp.audit import audit
from trsp.metaheuristic import (ILS_VARIANTS, EilsTrace, EliteSet, Params, arc_distance,
                                biased_scores, eils, ils, intensification, irrp,
                                ls_perturbation, retained_indices, select_ils,
                                solution_distance)
from trsp.route_eval import Solution

FAST = dict(n_ils=4, n_pop=4, cv1=1, cv2=1, ils_no_improve=2, irrp_intensify_iters=3)


@pytest.mark.parametrize("g, expected", [(0, 1), (45, 1), (46, 2), (75, 2), (76, 3), (105, 3),
                                         (106, 4), (135, 4), (136, 2), (166, 3)])
def test_select_ils_schedule(g, expected):
    assert select_ils(200 + g, 200, 45, 30) == expected


@given(st.integers(1, 500), st.integers(0, 500))
def test_select_ils_only_returns_variants(i, lst):
    assert select_ils(i, min(i, lst)) in ILS_VARIANTS


def test_arc_distance_examples():
    a = frozenset({(1, 2), (2, 3)})
    assert arc_distance(a, a) == 0.0
    assert arc_distance(a, frozenset({(4, 5)})) == 1.0
    assert arc_distance(a, frozenset({(1, 2), (2, 4)})) == pytest.approx(0.5)
    assert arc_distance(frozenset(), frozenset()) == 0.0


@given(st.integers(0, 300))
@settings(max_examples=20)
def test_solution_distance_is_a_symmetric_ratio(seed):
    inst = make_instance(10, 3, seed)
    a, b = greedy_solution(inst), scrambled_solution(inst, seed)
    d = solution_distance(a, b)
    assert 0.0 <= d <= 1.0
    assert d == solution_distance(b, a)
    assert solution_distance(a, a.copy()) == 0.0


def _ranks_oracle(values, higher_better=False):
    ordered = sorted(values, reverse=higher_better)
    return [ordered.index(v) for v in values]


@st.composite
def pools(draw):
    n = draw(st.integers(2, 9))
    fit = draw(st.lists(st.sampled_from([1.0, 2.0, 3.0, 5.0, 8.0]), min_size=n, max_size=n))
    d = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = draw(st.sampled_from([0.1, 0.25, 0.5, 0.75, 1.0]))
    return fit, d


@given(pools(), st.sampled_from([0.2, 0.5, 1.0]))
def test_biased_scores_brute_force(pool, frac):
    fit, d = pool
    n = len(fit)
    n_close = max(1, math.ceil(frac * n))
    div = []
    for i in range(n):
        row = sorted(d[i][j] for j in range(n) if j != i)[:n_close]
        div.append(sum(row) / len(row))
    expect = [a + b for a, b in zip(_ranks_oracle(fit), _ranks_oracle(div, True))]
    scores, got_div = biased_scores(fit, d, frac)
    assert got_div == pytest.approx(div)
    assert scores == expect


@given(pools(), st.integers(1, 5))
def test_retained_indices_keep_best(pool, n_pop):
    fit, d = pool
    keep = retained_indices(fit, d, n_pop)
    assert len(keep) == min(n_pop, len(fit))
    assert min(range(len(fit)), key=lambda i: (fit[i], i)) in keep
    assert keep == sorted(set(keep))


def test_elite_set_rejects_duplicates_and_stays_bounded():
    inst = make_instance(10, 3, 4)
    sols = [scrambled_solution(inst, s) for s in range(8)]
    elite = EliteSet(3)
    elite.initialize(sols[:2] + [sols[0].copy()])
    assert len(elite) == 2 and elite.discarded_duplicates == 1
    for s in sols[2:]:
        elite.add(s)
    assert len(elite) == 3
    assert elite.top().fitness == min(s.fitness for s in sols)
    rec = []
    for _ in range(20):
        elite.tournament(random.Random(1), rec)
    assert all(w == min(a, b) for a, b, w in rec)
    with pytest.raises(ValueError):
        EliteSet().tournament(random.Random(0))


def test_params_validation():
    assert Params().validate().n_ils == 600
    for bad in (dict(n_pop=0), dict(penalty=0.0), dict(n_close_frac=1.5), dict(depot_scope="x"),
                dict(time_limit=-1.0), dict(ils_no_improve=0)):
        with pytest.raises(ValueError):
            Params(**bad).validate()
    assert Params(seed=3).as_dict()["seed"] == 3


def test_constructive_irrp_schedules_tasks():
    inst = make_instance(12, 3, 2)
    out = irrp(Solution(inst), "constructive", "duration", Params(), random.Random(0))
    assert audit(out).feasible
    assert out.n_scheduled() > 0 and not out.check()
    with pytest.raises(ValueError):
        irrp(Solution(inst), "sideways", "duration", Params(), random.Random(0))


def test_intensify_irrp_never_worsens():
    inst = make_instance(12, 3, 5)
    start = scrambled_solution(inst, 5)
    out = irrp(start, "intensify", "duration", Params(), random.Random(2))
    assert out.fitness <= start.fitness + 1e-9
    assert audit(out).feasible


@given(st.integers(0, 200))
@settings(max_examples=10)
def test_intensification_reaches_a_local_optimum(seed):
    inst = make_instance(12, 3, seed)
    start = scrambled_solution(inst, seed)
    ctx = so.SearchContext(inst)
    out = intensification(start, ctx, Params(), random.Random(seed), use_irrp=False)
    assert out.fitness <= start.fitness + 1e-9
    assert audit(out).feasible
    sig = out.signature()
    for name in ("shift1", "exchange1", "two_opt_star", "two_opt", "r_opt", "swap_relocate",
                 "swap_sequence"):
        assert not getattr(so, name)(out, ctx)
    assert out.signature() == sig


@given(st.integers(0, 200), st.integers(1, 5))
@settings(max_examples=15)
def test_ls_perturbation_applies_non_improving_moves(seed, degree):
    inst = make_instance(12, 3, seed)
    start = greedy_solution(inst)
    ctx = so.SearchContext(inst)
    trace = []
    out = ls_perturbation(start, degree, ctx, random.Random(seed), trace=trace)
    assert len(trace) <= degree
    prev = start.fitness
    for s in trace:
        assert s.fitness >= prev - 1e-6
        prev = s.fitness
    assert audit(out).feasible
    assert start.signature() != out.signature() or not trace
    assert sorted(out.scheduled_tasks()) == sorted(start.scheduled_tasks())


def test_ils_returns_no_worse_than_intensified_start():
    inst = make_instance(10, 3, 1)
    params = Params(**FAST)
    for vid, variant in ILS_VARIANTS.items():
        start = scrambled_solution(inst, vid)
        ctx = so.SearchContext(inst)
        out = ils(start, variant, params, ctx, random.Random(vid))
        assert audit(out).feasible
        assert out.fitness <= start.fitness + 1e-6


def test_eils_is_deterministic_and_audited():
    inst = make_instance(10, 3, 9)
    checked = []
    runs = []
    for _ in range(2):
        tr = EilsTrace(audit=lambda s: checked.append(audit(s).feasible))
        res = eils(inst, Params(seed=4, **FAST), tr)
        runs.append((res.best.signature(), res.best.fitness, tr.best_fitness, tr.variants))
    assert runs[0] == runs[1]
    assert all(checked)
    best_curve = runs[0][2]
    assert all(b <= a + 1e-9 for a, b in zip(best_curve, best_curve[1:]))
    other = eils(inst, Params(seed=5, **FAST))
    assert audit(other.best).feasible


def test_eils_time_limit_stops_early():
    inst = make_instance(10, 3, 2)
    res = eils(inst, Params(seed=1, n_ils=10_000, time_limit=0.5, **{k: v for k, v in FAST.items()
                                                                      if k != "n_ils"}))
    assert res.iterations < 10_000
    assert audit(res.best).feasible

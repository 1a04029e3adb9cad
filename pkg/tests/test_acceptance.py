"""Acceptance criteria, one test each.

Every test appends a PASS/FAIL line that is printed in the terminal summary.
"""

import os
import random
import time
from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES, make_instance, scrambled_solution
from oracles import dp_min_duration, exhaustive_optimum, passive_slack
from trsp import search_ops as so
from trsp.audit import audit, audit_solution
from trsp.bench import (build_report, derive_seed, dev, load_best_known, load_reference_table,
                        reference_records, run_once)
from trsp.cli import main
from trsp.construct import best_insertion, best_insertion_naive
from trsp.instance_io import (GeneratorConfig, derive_trsp, format_solomon, parse_solomon,
                              synthetic_solomon)
from trsp.metaheuristic import EilsTrace, Params, eils
from trsp.route_eval import sequence_stats

TOL = 1e-6


def _record(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n} ({title}): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_kernel_matches_exact_schedule_oracle():
    insts = [make_instance(n, 4, s, tw_width=(40, 500)) for s, n in enumerate([10, 20, 30] * 7)]
    rng = random.Random(2024)
    t0 = time.perf_counter()
    checked = feasible = 0
    mismatches = []
    while checked < 100_000:
        inst = insts[checked % len(insts)]
        length = rng.randint(1, 8)
        nodes = rng.sample(range(inst.K + 1, inst.n_nodes), length)
        if rng.random() < 0.3:
            nodes.insert(rng.randint(0, length), 0)
        if rng.random() < 0.3:
            home = rng.randint(1, inst.K)
            nodes = [home] + nodes + [home]
        s = sequence_stats(nodes, inst)
        ok, dur = dp_min_duration(inst, nodes)
        if ok != s.feasible:
            mismatches.append((nodes, "feasibility"))
        elif ok:
            feasible += 1
            if abs(dur - s.duration) > TOL:
                mismatches.append((nodes, "duration"))
            elif abs(passive_slack(inst, nodes) - s.pts) > TOL:
                mismatches.append((nodes, "passive slack"))
        checked += 1
    elapsed = time.perf_counter() - t0
    _record(1, "evaluation kernel vs exact oracle", not mismatches and elapsed < 60,
            f"{checked} segments ({feasible} feasible), {len(mismatches)} mismatches, {elapsed:.1f}s")


def test_criterion_2_move_deltas_match_recomputation():
    insts = [make_instance(12, 3, s, tool_density=0.3, tw_width=(60, 500)) for s in range(10)]
    per_family = 10_000
    t0 = time.perf_counter()
    failures = {}
    for fam, gen in sorted(so.MOVE_FAMILIES.items()):
        rng = random.Random(fam)
        bad = applied = 0
        sol = None
        while applied < per_family:
            if sol is None or applied % 40 == 0:
                inst = rng.choice(insts)
                sol = scrambled_solution(inst, rng.randrange(10 ** 6))
                ctx = so.SearchContext(inst)
                prev = audit(sol).duration
            moves = list(gen(sol, ctx))
            if not moves:
                sol = None
                continue
            mv = rng.choice(moves)
            mv.apply()
            after = audit(sol)
            if not after.feasible or sol.check() or abs(after.duration - prev - mv.delta) > TOL:
                bad += 1
            prev = after.duration
            applied += 1
        failures[fam] = bad
    elapsed = time.perf_counter() - t0
    ok = not any(failures.values()) and elapsed < 120
    _record(2, "move evaluation vs from-scratch audit", ok,
            f"{per_family} moves x {len(failures)} families, failures {failures}, {elapsed:.1f}s")


def test_criterion_3_small_instance_optimality():
    matched = 0
    oracle_time = 0.0
    misses = []
    for seed in range(20):
        inst = make_instance(8, 3, 1000 + seed)
        t0 = time.perf_counter()
        opt = exhaustive_optimum(inst)
        oracle_time += time.perf_counter() - t0
        res = eils(inst, Params(n_ils=50, seed=seed))
        assert audit(res.best).feasible
        if abs(res.best.fitness - opt) <= TOL:
            matched += 1
        else:
            misses.append((seed, round(res.best.fitness, 3), round(opt, 3)))
    _record(3, "small-instance optimality", matched >= 19 and oracle_time < 300,
            f"{matched}/20 optimal, exhaustive oracle {oracle_time:.1f}s, misses {misses}")


def test_criterion_4_heap_insertion_equals_naive():
    rng = random.Random(4)
    diffs = 0
    for state in range(50):
        inst = make_instance(12, rng.randint(2, 4), 400 + state, tool_density=0.3)
        sol = scrambled_solution(inst, state)
        for t in rng.sample(sol.scheduled_tasks(), min(len(sol.scheduled_tasks()), rng.randint(2, 8))):
            sol.remove_task(t)
        pending = sorted(sol.unscheduled)
        for scope in ("route", "global"):
            a, b = sol.copy(), sol.copy()
            best_insertion(a, pending, "duration", scope)
            best_insertion_naive(b, pending, "duration", scope)
            if set(a.scheduled_tasks()) != set(b.scheduled_tasks()) or a.fitness != b.fitness:
                diffs += 1
    _record(4, "priority-queue vs naive best insertion", diffs == 0,
            f"50 states x 2 depot scopes, {diffs} differences")


def _solomon_file(directory, name):
    for p in sorted(Path(directory).iterdir()):
        if p.stem.upper() == name:
            return p
    return None


def test_criterion_5_desk_scale_benchmark():
    directory = os.environ.get("TRSP_SOLOMON_DIR")
    files = {n: _solomon_file(directory, n) for n in ("C101", "R201")} if directory else {}
    if not directory or not all(files.values()):
        _record(5, "desk-scale benchmark", False,
                "Solomon C101/R201 files not found; set TRSP_SOLOMON_DIR to a directory holding them")
    problems = []
    summary = []
    for name, path in files.items():
        inst = derive_trsp(parse_solomon(path.read_text()), GeneratorConfig(seed=0))
        bests = []
        for run in range(10):
            params = Params(seed=derive_seed(0, name, run))
            out = run_once(inst, params)
            curve = out.best_trace
            if out.record.time >= 900:
                problems.append(f"{name} run {run} took {out.record.time:.0f}s")
            if any(b > a + TOL for a, b in zip(curve, curve[1:])):
                problems.append(f"{name} run {run} best-so-far trace not monotone")
            au = audit_solution(inst, out.visits, out.unscheduled, params.penalty)
            if not au.feasible or abs(au.fitness - out.record.best) > TOL * max(1.0, au.fitness):
                problems.append(f"{name} run {run} fails the audit")
            bests.append(out.record.best)
        d = dev(min(bests), sum(bests) / len(bests))
        if d > 1.5:
            problems.append(f"{name} DEV {d:.2f}%")
        summary.append(f"{name} DEV {d:.2f}%")
    _record(5, "desk-scale benchmark", not problems, "; ".join(summary + problems))


def test_criterion_6_summary_table_arithmetic():
    rows = load_reference_table()
    rep = build_report(reference_records(rows), load_best_known())
    ok = abs(rep.mean.gap - 0.184) <= 0.01 and abs(rep.mean.cpu - 360.54) <= 0.01
    _record(6, "report arithmetic on published per-instance values", ok,
            f"mean GAP {rep.mean.gap:.4f}% (0.184), mean CPU {rep.mean.cpu:.3f}s (360.54)")


TINY = ["--n-ils", "3", "--n-pop", "4", "--ils-no-improve", "2", "--irrp-intensify-iters", "3"]


def test_criterion_7_repeated_invocations_are_identical(tmp_path, capsys):
    base = tmp_path / "C101.txt"
    base.write_text(format_solomon(synthetic_solomon(10, 7, name="C101")))
    inst_dir = tmp_path / "inst"
    main(["generate", str(base), "-o", str(inst_dir / "C101.trsp"), "--seed", "3", "--n-depots", "3"])
    outputs = []
    for rep in range(2):
        d = tmp_path / f"rep{rep}"
        d.mkdir()
        assert main(["solve", str(inst_dir / "C101.trsp"), "-o", str(d / "s.sol"),
                     "--log", str(d / "s.log"), "--seed", "11"] + TINY) == 0
        assert main(["bench", str(inst_dir), "-o", str(d / "b.csv"), "--seed", "11", "--runs", "2",
                     "--no-timing", "--gnuplot", str(d / "plots"), "--solutions", str(d / "sols")]
                    + TINY) == 0
        outputs.append({p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()})
    timed = []
    for rep in range(2):
        out = tmp_path / f"timed{rep}.csv"
        assert main(["bench", str(inst_dir), "-o", str(out), "--seed", "11", "--runs", "2"] + TINY) == 0
        timed.append([row.split(",")[:8] + row.split(",")[9:] for row in out.read_text().splitlines()])
    capsys.readouterr()
    same = outputs[0] == outputs[1]
    _record(7, "determinism of solve and bench", same and timed[0] == timed[1],
            f"{len(outputs[0])} output files byte-identical: {same}; "
            f"timed CSVs identical outside the cpu column: {timed[0] == timed[1]}")


def test_criterion_8_elite_set_properties():
    max_size = 0
    violations = []
    tournaments = 0
    for seed in range(3):
        inst = make_instance(20, 4, 800 + seed)
        trace = EilsTrace(audit=lambda s: None)
        eils(inst, Params(n_ils=40, seed=seed, ils_no_improve=4), trace)
        max_size = max(max_size, max(trace.elite_sizes))
        if max(trace.elite_sizes) > 10:
            violations.append(f"seed {seed}: size {max(trace.elite_sizes)}")
        if min(trace.elite_min_distance) <= 0.0:
            violations.append(f"seed {seed}: zero-distance pair")
        for a, b, w in trace.tournaments:
            tournaments += 1
            if w != min(a, b):
                violations.append(f"seed {seed}: tournament {a} vs {b} won by {w}")
    _record(8, "elite set bound, diversity and tournament", not violations and max_size == 10,
            f"largest elite {max_size}, {tournaments} tournaments, violations {violations}")

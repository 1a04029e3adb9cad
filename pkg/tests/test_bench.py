import pytest
from hypothesis import given, strategies as st

from conftest import make_instance
from trsp.bench import (CSV_COLUMNS, RunRecord, build_report, derive_seed, dev, gap,
                        instance_class, load_best_known, load_reference_table, read_records_csv,
                        reference_records, report_csv, run_benchmark, write_gnuplot)
from trsp.metaheuristic import Params


def test_gap_examples():
    assert gap(10685.9, 10685.9) == 0
    assert gap(10685.9, 10717.52) == pytest.approx(0.2959, abs=1e-4)
    assert gap(100.0, 90.0) < 0
    with pytest.raises(ValueError):
        gap(0.0, 1.0)


def test_dev_examples():
    assert dev(10685.9, 10685.9) == 0
    assert dev(10685.9, 10743.4) == pytest.approx(0.538, abs=1e-3)
    with pytest.raises(ValueError):
        dev(100.0, 99.0)


@pytest.mark.parametrize("name, cls", [("C101", "C1"), ("c205", "C2"), ("R112", "R1"),
                                       ("R201", "R2"), ("RC105", "RC1"), ("RC208", "RC2"),
                                       ("toy", "other")])
def test_instance_class(name, cls):
    assert instance_class(name) == cls


def test_bundled_table():
    rows = load_reference_table()
    assert len(rows) == 56
    bk = load_best_known()
    assert bk["C101"] == 10685.9
    assert {instance_class(r.name) for r in rows} == {"C1", "C2", "R1", "R2", "RC1", "RC2"}


def test_table_errors(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("# header\nC101 abc\n")
    with pytest.raises(ValueError, match="line 2"):
        load_reference_table(p)
    p.write_text("C101\n")
    with pytest.raises(ValueError, match="columns"):
        load_reference_table(p)


def test_run_record_invariants():
    with pytest.raises(ValueError):
        RunRecord("C101", 0, 10.0, 10.0, -1.0, 1)
    with pytest.raises(ValueError):
        RunRecord("C101", 0, 11.0, 10.0, 1.0, 1)


def test_single_run_report():
    rec = RunRecord("C101", 7, 10717.52, 10717.52, 12.5, 3)
    rep = build_report([rec], {"C101": 10685.9})
    row = rep.instance("C101")
    assert (row.best, row.avg, row.cpu, row.runs, row.dev) == (10717.52, 10717.52, 12.5, 1, 0.0)
    assert row.gap == pytest.approx(0.2959, abs=1e-4)
    assert rep.by_class("C1").gap == row.gap
    with pytest.raises(KeyError):
        rep.by_class("R2")


@given(st.lists(st.tuples(st.sampled_from(["C101", "C102", "R101", "R205", "RC101"]),
                          st.floats(100, 200), st.floats(0, 50), st.floats(0, 10)),
                min_size=1, max_size=20))
def test_class_aggregation_matches_direct_computation(entries):
    records = [RunRecord(n, i, b, b + extra, t, 1) for i, (n, b, extra, t) in enumerate(entries)]
    bk = {"C101": 120.0, "C102": 130.0, "R101": 150.0, "R205": 110.0, "RC101": 140.0}
    rep = build_report(records, bk)
    per = {}
    for r in records:
        per.setdefault(r.instance, []).append(r)
    direct = {}
    for name, recs in per.items():
        best = min(r.best for r in recs)
        avg = sum(r.best for r in recs) / len(recs)
        direct[name] = ((best - bk[name]) / bk[name] * 100, (avg - best) / best * 100)
    for c in rep.classes:
        names = [n for n in direct if instance_class(n) == c.cls]
        assert c.n_instances == len(names)
        assert c.gap == pytest.approx(sum(direct[n][0] for n in names) / len(names))
        assert c.dev == pytest.approx(sum(direct[n][1] for n in names) / len(names), abs=1e-9)
    assert rep.mean.gap == pytest.approx(sum(g for g, _ in direct.values()) / len(direct))


def test_reference_records_reproduce_rows():
    rows = load_reference_table()
    rep = build_report(reference_records(rows), load_best_known())
    for r in rows:
        got = rep.instance(r.name)
        assert got.best == pytest.approx(r.eils_best)
        assert got.avg == pytest.approx(r.eils_avg)
        assert got.cpu == pytest.approx(r.eils_cpu)


def test_csv_roundtrip():
    recs = [RunRecord("C101", 1, 10.0, 11.0, 2.0, 5), RunRecord("C101", 2, 12.0, 12.0, 3.0, 5)]
    rep = build_report(recs, {"C101": 10.0})
    text = report_csv(recs, rep)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    back = read_records_csv(text)
    assert [(r.instance, r.seed, r.best, r.final, r.time, r.iterations) for r in back] == \
        [(r.instance, r.seed, r.best, r.final, r.time, r.iterations) for r in recs]
    assert report_csv(back, build_report(back, {"C101": 10.0})) == text


def test_derive_seed_is_stable():
    assert derive_seed(1, "C101", 0) == derive_seed(1, "C101", 0)
    assert len({derive_seed(1, "C101", r) for r in range(10)}) == 10


def test_run_benchmark_small(tmp_path):
    insts = [make_instance(6, 2, 1), make_instance(6, 2, 2)]
    params = Params(n_ils=2, n_pop=3, ils_no_improve=1, irrp_intensify_iters=2)
    out1, rep1 = run_benchmark(insts, 2, params, master_seed=3, timing=False)
    out2, rep2 = run_benchmark(insts, 2, params, master_seed=3, timing=False, jobs=2)
    t1 = report_csv([o.record for o in out1], rep1)
    assert t1 == report_csv([o.record for o in out2], rep2)
    files = write_gnuplot(out1, rep1, tmp_path / "plots")
    assert files[0].name == "summary.dat" and len(files) == 1 + len(out1)
    with pytest.raises(ValueError, match="no instances"):
        run_benchmark([], 1, params)

"""Multi-seed benchmark harness and GAP / DEV / CPU reporting."""

from __future__ import annotations

import csv
import io
import random
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .metaheuristic import EilsTrace, Params, eils
from .model import Instance

CLASSES = ("C1", "C2", "R1", "R2", "RC1", "RC2")
CSV_COLUMNS = ("kind", "name", "class", "seed", "runs", "best", "avg", "final", "cpu",
               "iterations", "best_known", "gap", "dev")


def gap(best_known: float, method_best: float) -> float:
    """Percent distance of a method's best value above the best-known value."""
    if best_known == 0:
        raise ValueError("best-known value must be non-zero")
    return (method_best - best_known) / best_known * 100.0


def dev(method_best: float, method_avg: float, tol: float = 1e-9) -> float:
    """Percent deviation of the average run from the best run."""
    if method_best == 0:
        raise ValueError("best value must be non-zero")
    if method_avg < method_best - tol * max(1.0, abs(method_best)):
        raise ValueError(f"average {method_avg} below best {method_best}")
    return (method_avg - method_best) / method_best * 100.0


def instance_class(name: str) -> str:
    m = re.match(r"(RC|C|R)([12])\d\d", name.upper())
    return m.group(1) + m.group(2) if m else "other"


@dataclass
class RunRecord:
    instance: str
    seed: int
    best: float
    final: float
    time: float
    iterations: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.time < 0:
            raise ValueError("run time must be non-negative")
        if self.best > self.final + 1e-9:
            raise ValueError("best objective exceeds the final incumbent")


@dataclass
class InstanceRow:
    name: str
    cls: str
    runs: int
    best: float
    avg: float
    cpu: float
    best_known: float | None
    gap: float | None
    dev: float


@dataclass
class ClassRow:
    cls: str
    n_instances: int
    cpu: float
    gap: float | None
    dev: float


@dataclass
class Report:
    instances: list
    classes: list
    mean: ClassRow | None

    def instance(self, name: str) -> InstanceRow:
        for r in self.instances:
            if r.name == name:
                return r
        raise KeyError(name)

    def by_class(self, cls: str) -> ClassRow:
        for r in self.classes:
            if r.cls == cls:
                return r
        raise KeyError(cls)


def _mean(xs):
    xs = list(xs)
    return sum(xs) / len(xs)


def _aggregate(rows, cls) -> ClassRow:
    gaps = [r.gap for r in rows if r.gap is not None]
    return ClassRow(cls, len(rows), _mean(r.cpu for r in rows),
                    _mean(gaps) if len(gaps) == len(rows) else None,
                    _mean(r.dev for r in rows))


def build_report(records, best_known: dict | None = None) -> Report:
    """Aggregate run records per instance, per class, and over all instances.

    The overall row averages instance rows directly (not class rows).
    """
    best_known = best_known or {}
    grouped: dict = {}
    for rec in records:
        grouped.setdefault(rec.instance, []).append(rec)
    rows = []
    for name in sorted(grouped):
        recs = grouped[name]
        best = min(r.best for r in recs)
        avg = _mean(r.best for r in recs)
        bk = best_known.get(name)
        rows.append(InstanceRow(name, instance_class(name), len(recs), best, avg,
                                _mean(r.time for r in recs), bk,
                                gap(bk, best) if bk is not None else None, dev(best, avg)))
    classes = []
    order = list(CLASSES) + sorted({r.cls for r in rows} - set(CLASSES))
    for cls in order:
        members = [r for r in rows if r.cls == cls]
        if members:
            classes.append(_aggregate(members, cls))
    return Report(rows, classes, _aggregate(rows, "all") if rows else None)


# -- best-known table -------------------------------------------------------

@dataclass(frozen=True)
class ReferenceRow:
    name: str
    best_known: float
    palns_best: float | None = None
    eils_best: float | None = None
    eils_avg: float | None = None
    eils_cpu: float | None = None


def _read_text(path) -> str:
    if path is None:
        return resources.files("trsp").joinpath("data/best_known.txt").read_text()
    return Path(path).read_text()


def load_reference_table(path=None) -> list[ReferenceRow]:
    rows = []
    for lineno, raw in enumerate(_read_text(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            vals = [float(x) for x in toks[1:]]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric value") from None
        if not 1 <= len(vals) <= 5:
            raise ValueError(f"line {lineno}: expected 2 to 6 columns")
        rows.append(ReferenceRow(toks[0], *vals))
    return rows


def load_best_known(path=None) -> dict:
    return {r.name: r.best_known for r in load_reference_table(path)}


def reference_records(rows) -> list[RunRecord]:
    """Two synthetic runs per row whose BEST, AVG and CPU equal the tabulated eILS values."""
    out = []
    for r in rows:
        if r.eils_best is None or r.eils_avg is None or r.eils_cpu is None:
            continue
        hi = 2 * r.eils_avg - r.eils_best  # mean of (best, hi) == avg
        out.append(RunRecord(r.name, 0, r.eils_best, r.eils_best, r.eils_cpu, 0))
        out.append(RunRecord(r.name, 1, hi, hi, r.eils_cpu, 0))
    return out


# -- running -----------------------------------------------------------------

def derive_seed(master_seed: int, name: str, run: int) -> int:
    return random.Random(f"{master_seed}:{name}:{run}").randrange(2 ** 31)


@dataclass
class RunOutcome:
    record: RunRecord
    visits: list
    unscheduled: list
    best_trace: list


def run_once(inst: Instance, params: Params, timing: bool = True) -> RunOutcome:
    trace = EilsTrace()
    t0 = time.perf_counter()
    res = eils(inst, params, trace)
    elapsed = time.perf_counter() - t0 if timing else 0.0
    best = res.best.fitness
    final = trace.ils_fitness[-1] if trace.ils_fitness else best
    rec = RunRecord(inst.name, params.seed, best, max(final, best), elapsed, res.iterations,
                    params.as_dict())
    return RunOutcome(rec, res.best.visits(), sorted(res.best.unscheduled), trace.best_fitness)


def _job(args):
    return run_once(*args)


def run_benchmark(instances, runs_per_instance: int = 10, params: Params | None = None,
                  master_seed: int = 0, jobs: int = 1, best_known: dict | None = None,
                  timing: bool = True):
    """Run every instance ``runs_per_instance`` times; returns (outcomes, report)."""
    if runs_per_instance < 1:
        raise ValueError("runs_per_instance must be >= 1")
    instances = list(instances)
    if not instances:
        raise ValueError("no instances")
    params = params or Params()
    tasks = [(inst, replace(params, seed=derive_seed(master_seed, inst.name, r)), timing)
             for inst in instances for r in range(runs_per_instance)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_job, tasks))
    else:
        outcomes = [_job(t) for t in tasks]
    report = build_report([o.record for o in outcomes], best_known)
    return outcomes, report


# -- output ------------------------------------------------------------------

def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{x:.6f}"


def report_csv(records, report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(["run", r.instance, instance_class(r.instance), r.seed, 1, _num(r.best), "",
                    _num(r.final), _num(r.time), r.iterations, "", "", ""])
    for r in report.instances:
        w.writerow(["instance", r.name, r.cls, "", r.runs, _num(r.best), _num(r.avg), "",
                    _num(r.cpu), "", _num(r.best_known), _num(r.gap), _num(r.dev)])
    for c in report.classes + ([report.mean] if report.mean else []):
        w.writerow(["class" if c.cls != "all" else "mean", c.cls, c.cls, "", c.n_instances,
                    "", "", "", _num(c.cpu), "", "", _num(c.gap), _num(c.dev)])
    return buf.getvalue()


def read_records_csv(text: str) -> list[RunRecord]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        if row["kind"] != "run":
            continue
        out.append(RunRecord(row["name"], int(row["seed"]), float(row["best"]),
                             float(row["final"]), float(row["cpu"]), int(row["iterations"])))
    return out


def write_gnuplot(outcomes, report: Report, directory) -> list[Path]:
    """Whitespace-separated data files: a summary table and one convergence file per run."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    lines = ["# idx instance best avg cpu gap dev"]
    for i, r in enumerate(report.instances):
        g = "NaN" if r.gap is None else f"{r.gap:.6f}"
        lines.append(f"{i} {r.name} {r.best:.6f} {r.avg:.6f} {r.cpu:.6f} {g} {r.dev:.6f}")
    p = d / "summary.dat"
    p.write_text("\n".join(lines) + "\n")
    written.append(p)
    for o in outcomes:
        p = d / f"trace_{o.record.instance}_{o.record.seed}.dat"
        p.write_text("# iteration best_fitness\n"
                     + "".join(f"{i + 1} {v:.6f}\n" for i, v in enumerate(o.best_trace)))
        written.append(p)
    return written

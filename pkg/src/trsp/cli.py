"""Command-line entry point: generate, solve, bench, report, verify."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .audit import audit_solution
from .bench import (build_report, load_best_known, read_records_csv, report_csv, run_benchmark,
                    run_once, write_gnuplot)
from .instance_io import (ConfigError, GeneratorConfig, ParseError, derive_trsp, format_solution,
                          load_trsp, parse_solomon, parse_solution, write_trsp)
from .metaheuristic import Params
from .route_eval import Route, Solution

DATA_ENV = "TRSP_DATA_DIR"
INSTANCE_SUFFIX = ".trsp"

_PARAM_HELP = {
    "d_max_intensify": "removal degree of the IRRP inside intensification",
    "n_ils": "number of elite-set iterations",
    "n_pop": "elite-set capacity",
    "d0": "initial perturbation degree",
    "cv1": "stalled iterations before leaving ILS1",
    "cv2": "iterations per variant in the second phase",
    "chi": "predecessor list length",
    "ils_no_improve": "ILS stop after this many stalled iterations (default: number of tasks)",
    "irrp_intensify_iters": "IRRP iterations inside intensification (default: number of tasks)",
    "n_initial": "constructive solutions (default: number of technicians)",
    "time_limit": "wall-clock cap in seconds (results then depend on machine speed)",
    "depot_scope": "when best insertion considers a central-depot visit: global or route",
}


class CliError(Exception):
    pass


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver parameters")
    for f in dataclasses.fields(Params):
        if f.name == "seed":
            continue
        flag = "--" + f.name.replace("_", "-")
        default = f.default
        if isinstance(default, bool):
            g.add_argument(flag, action=argparse.BooleanOptionalAction, default=default,
                           help=_PARAM_HELP.get(f.name))
            continue
        if f.name == "time_limit" or f.name == "penalty" or f.name == "n_close_frac":
            kind = float
        elif f.name == "depot_scope":
            kind = str
        else:
            kind = int
        g.add_argument(flag, type=kind, default=default, help=_PARAM_HELP.get(f.name))


def _params(args) -> Params:
    kw = {f.name: getattr(args, f.name) for f in dataclasses.fields(Params) if f.name != "seed"}
    try:
        return Params(seed=args.seed, **kw).validate()
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_generate(args) -> int:
    base = parse_solomon(Path(args.solomon).read_text())
    if args.name:
        base = dataclasses.replace(base, name=args.name)
    cfg = GeneratorConfig(seed=args.seed, n_depots=args.n_depots, n_skills=args.n_skills,
                          n_tools=args.n_tools, n_parts=args.n_parts,
                          skill_density=args.skill_density,
                          tech_skill_density=args.tech_skill_density,
                          tool_density=args.tool_density, part_density=args.part_density,
                          max_part_demand=args.max_part_demand,
                          distance_rounding=args.distance_rounding, delta0=args.delta0)
    inst = derive_trsp(base, cfg)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    write_trsp(inst, args.output)
    print(f"wrote {args.output}: {inst.N} tasks, {inst.K} technicians")
    return 0


def cmd_solve(args) -> int:
    inst = load_trsp(args.instance)
    params = _params(args)
    out = run_once(inst, params, timing=True)
    sol = Solution(inst, [Route(inst, k, v) for k, v in enumerate(out.visits)], out.unscheduled,
                   penalty=params.penalty)
    text = format_solution(sol)
    Path(args.output).write_text(text)
    log = (f"instance {inst.name} seed {params.seed} fitness {sol.fitness:.6f} "
           f"duration {sol.duration_total:.6f} unscheduled {len(sol.unscheduled)} "
           f"iterations {out.record.iterations}\n")
    # wall time goes to stderr only so the log file stays reproducible
    if args.log:
        Path(args.log).write_text(log)
    sys.stderr.write(log.rstrip("\n") + f" time {out.record.time:.2f}s\n")
    return 0


def _instance_files(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise CliError(f"not a directory: {d}")
    return sorted(p for p in d.iterdir() if p.suffix == INSTANCE_SUFFIX)


def cmd_bench(args) -> int:
    directory = args.instances or os.environ.get(DATA_ENV)
    if not directory:
        raise CliError(f"no instance directory given and {DATA_ENV} is unset")
    files = _instance_files(directory)
    if not files:
        raise CliError(f"no instances in {directory}")
    instances = [load_trsp(p) for p in files]
    best_known = load_best_known(args.best_known)
    outcomes, report = run_benchmark(instances, args.runs, _params(args), master_seed=args.seed,
                                     jobs=args.jobs, best_known=best_known,
                                     timing=not args.no_timing)
    Path(args.output).write_text(report_csv([o.record for o in outcomes], report))
    if args.gnuplot:
        write_gnuplot(outcomes, report, args.gnuplot)
    if args.solutions:
        d = Path(args.solutions)
        d.mkdir(parents=True, exist_ok=True)
        for inst, o in zip([i for i in instances for _ in range(args.runs)], outcomes):
            sol = Solution(inst, [Route(inst, k, v) for k, v in enumerate(o.visits)], o.unscheduled)
            (d / f"{inst.name}_{o.record.seed}.sol").write_text(format_solution(sol))
    _print_report(report)
    return 0


def _print_report(report) -> None:
    for c in report.classes + ([report.mean] if report.mean else []):
        g = "-" if c.gap is None else f"{c.gap:.3f}"
        print(f"{c.cls:>5}  n={c.n_instances:<3d} CPU={c.cpu:10.2f}s  GAP={g:>7}%  DEV={c.dev:.3f}%")


def cmd_report(args) -> int:
    records = read_records_csv(Path(args.records).read_text())
    if not records:
        raise CliError("no run records")
    report = build_report(records, load_best_known(args.best_known))
    if args.output:
        Path(args.output).write_text(report_csv(records, report))
    _print_report(report)
    return 0


def cmd_verify(args) -> int:
    inst = load_trsp(args.instance)
    rec = parse_solution(Path(args.solution).read_text(), inst)
    res = audit_solution(inst, rec.visits, rec.unscheduled, args.penalty)
    print(f"feasible: {res.feasible}")
    print(f"duration: {res.duration:.6f}")
    print(f"fitness: {res.fitness:.6f}")
    for p in res.problems:
        print(f"problem: {p}")
    ok = res.feasible
    if rec.fitness is not None and abs(rec.fitness - res.fitness) > args.tol * max(1.0, abs(res.fitness)):
        print(f"mismatch: file states fitness {rec.fitness:.6f}")
        ok = False
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trsp", description="Technician routing and scheduling solver")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="derive a TRSP instance from a Solomon file")
    g.add_argument("solomon")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--name")
    d = GeneratorConfig()
    g.add_argument("--n-depots", type=int, default=d.n_depots)
    g.add_argument("--n-skills", type=int, default=d.n_skills)
    g.add_argument("--n-tools", type=int, default=d.n_tools)
    g.add_argument("--n-parts", type=int, default=d.n_parts)
    g.add_argument("--skill-density", type=float, default=d.skill_density)
    g.add_argument("--tech-skill-density", type=float, default=d.tech_skill_density)
    g.add_argument("--tool-density", type=float, default=d.tool_density)
    g.add_argument("--part-density", type=float, default=d.part_density)
    g.add_argument("--max-part-demand", type=int, default=d.max_part_demand)
    g.add_argument("--distance-rounding", choices=("none", "one-decimal-truncation"),
                   default=d.distance_rounding)
    g.add_argument("--delta0", type=float, default=None)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run eILS on one instance")
    s.add_argument("instance")
    s.add_argument("-o", "--output", required=True, help="solution file")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--log", help="also write the one-line run log here")
    _add_param_flags(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="multi-seed runs over a directory of .trsp files")
    b.add_argument("instances", nargs="?", help=f"instance directory (default: ${DATA_ENV})")
    b.add_argument("-o", "--output", required=True, help="CSV report")
    b.add_argument("--seed", type=int, required=True, help="master seed")
    b.add_argument("--runs", type=int, default=10)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--best-known", help="reference table (default: bundled)")
    b.add_argument("--gnuplot", help="directory for gnuplot data files")
    b.add_argument("--solutions", help="directory for per-run solution files")
    b.add_argument("--no-timing", action="store_true",
                   help="record zero CPU time so the CSV is reproducible byte for byte")
    _add_param_flags(b)
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("report", help="recompute the report from a CSV of run records")
    r.add_argument("records")
    r.add_argument("-o", "--output")
    r.add_argument("--best-known")
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("verify", help="independent feasibility audit of a solution file")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--penalty", type=float, default=1e3)
    v.add_argument("--tol", type=float, default=1e-6)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ParseError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Derive TRSP instances from Solomon files and run the multi-seed benchmark.

    python3 scripts/solomon_benchmark.py SOLOMON_DIR --names C101 R201 --runs 10 -o results.csv

Instances are built with the default generator (seed 0, 25 technicians, 5 skills).
"""

import argparse
from pathlib import Path

from trsp.bench import load_best_known, report_csv, run_benchmark, write_gnuplot
from trsp.instance_io import GeneratorConfig, derive_trsp, parse_solomon
from trsp.metaheuristic import Params


def main():
    p = argparse.ArgumentParser(description="multi-seed eILS runs on Solomon-derived instances")
    p.add_argument("solomon_dir")
    p.add_argument("--names", nargs="*", help="instance names (default: every file)")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--generator-seed", type=int, default=0)
    p.add_argument("--n-ils", type=int, default=600)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", default="solomon_results.csv")
    p.add_argument("--gnuplot")
    args = p.parse_args()

    files = sorted(f for f in Path(args.solomon_dir).iterdir() if f.is_file())
    if args.names:
        wanted = {n.upper() for n in args.names}
        files = [f for f in files if f.stem.upper() in wanted]
    instances = [derive_trsp(parse_solomon(f.read_text()), GeneratorConfig(seed=args.generator_seed))
                 for f in files]
    params = Params(n_ils=args.n_ils, time_limit=args.time_limit)
    outcomes, report = run_benchmark(instances, args.runs, params, master_seed=args.seed,
                                     jobs=args.jobs, best_known=load_best_known())
    Path(args.output).write_text(report_csv([o.record for o in outcomes], report))
    if args.gnuplot:
        write_gnuplot(outcomes, report, args.gnuplot)
    for r in report.instances:
        print(f"{r.name:>8} best {r.best:10.2f} avg {r.avg:10.2f} cpu {r.cpu:8.1f}s dev {r.dev:.2f}%")


if __name__ == "__main__":
    main()

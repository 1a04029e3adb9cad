"""Recompute the per-class eILS summary (CPU, GAP, DEV) from the bundled per-instance table.

    python3 scripts/reproduce_summary_table.py [--table FILE] [--csv OUT]
"""

import argparse
from pathlib import Path

from trsp.bench import (build_report, instance_class, load_reference_table, reference_records,
                        report_csv)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--table", help="reference table (default: bundled)")
    p.add_argument("--csv", help="also write the report as CSV")
    args = p.parse_args()

    rows = load_reference_table(args.table)
    records = reference_records(rows)
    report = build_report(records, {r.name: r.best_known for r in rows})
    print(f"{'class':>6} {'n':>3} {'CPU (s)':>9} {'GAP %':>7} {'DEV %':>7}")
    for c in report.classes + [report.mean]:
        print(f"{c.cls:>6} {c.n_instances:3d} {c.cpu:9.2f} {c.gap:7.3f} {c.dev:7.3f}")
    class_cpu = sum(c.cpu for c in report.classes) / len(report.classes)
    print(f"\nmean of class rows instead of instance rows: CPU {class_cpu:.2f}")

    # same rows with the method's own values as denominators (GAP over BEST, DEV over AVG)
    print(f"\n{'class':>6} {'GAP %':>7} {'DEV %':>7}   (denominators: method best / method avg)")
    by_class = {}
    for r in rows:
        by_class.setdefault(instance_class(r.name), []).append(r)
    for cls, members in list(by_class.items()) + [("all", rows)]:
        g = sum((r.eils_best - r.best_known) / r.eils_best for r in members) / len(members)
        d = sum((r.eils_avg - r.eils_best) / r.eils_avg for r in members) / len(members)
        print(f"{cls:>6} {100 * g:7.3f} {100 * d:7.3f}")
    if args.csv:
        Path(args.csv).write_text(report_csv(records, report))


if __name__ == "__main__":
    main()

"""Compare eILS against exhaustive enumeration on small random instances.

    python3 scripts/small_instance_optimality.py --instances 20 --depot-scope route
    python3 scripts/small_instance_optimality.py --depot-scope global

The enumeration lives in tests/oracles.py, which is imported from the source tree.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from oracles import exhaustive_optimum  # noqa: E402
from trsp.audit import audit  # noqa: E402
from trsp.instance_io import random_instance  # noqa: E402
from trsp.metaheuristic import Params, eils  # noqa: E402


def main():
    p = argparse.ArgumentParser(description="eILS vs exhaustive optimum on small instances")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--tasks", type=int, default=8)
    p.add_argument("--techs", type=int, default=3)
    p.add_argument("--first-seed", type=int, default=1000)
    p.add_argument("--n-ils", type=int, default=50)
    p.add_argument("--depot-scope", choices=("global", "route"), default="route")
    args = p.parse_args()

    hits = 0
    t_oracle = t_solver = 0.0
    for i in range(args.instances):
        inst = random_instance(args.tasks, args.techs, args.first_seed + i)
        t0 = time.perf_counter()
        opt = exhaustive_optimum(inst)
        t1 = time.perf_counter()
        res = eils(inst, Params(n_ils=args.n_ils, seed=i, depot_scope=args.depot_scope))
        t2 = time.perf_counter()
        t_oracle += t1 - t0
        t_solver += t2 - t1
        got = res.best.fitness
        assert audit(res.best).feasible
        ok = abs(got - opt) <= 1e-6
        hits += ok
        print(f"{inst.name:>10}  optimum {opt:10.3f}  eils {got:10.3f}  {'ok' if ok else 'MISS'}")
    print(f"\n{hits}/{args.instances} optimal  (oracle {t_oracle:.1f}s, solver {t_solver:.1f}s)")


if __name__ == "__main__":
    main()

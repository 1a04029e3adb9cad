"""Time the building blocks of one full-parameter run and project the total.

    python3 scripts/runtime_projection.py --tasks 100 --techs 25 [--chain]

A run is K constructive IRRP passes plus n_ils ILS chains; --chain times one
complete chain (minutes), otherwise a chain is estimated from the intensification
time and the stall limit.
"""

import argparse
import random
import time

from trsp import search_ops as so
from trsp.instance_io import random_instance
from trsp.metaheuristic import ILS_VARIANTS, Params, ils, intensification, irrp
from trsp.route_eval import Solution


def main():
    p = argparse.ArgumentParser(description="runtime projection for full eILS parameters")
    p.add_argument("--tasks", type=int, default=100)
    p.add_argument("--techs", type=int, default=25)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--chain", action="store_true", help="time one complete ILS chain")
    args = p.parse_args()

    inst = random_instance(args.tasks, args.techs, args.seed)
    params = Params()
    rng = random.Random(0)
    t0 = time.perf_counter()
    sol = irrp(Solution(inst), "constructive", "duration", params, rng)
    t_build = time.perf_counter() - t0
    ctx = so.SearchContext(inst)
    t0 = time.perf_counter()
    intensification(sol, ctx, params, rng)
    t_int = time.perf_counter() - t0
    if args.chain:
        t0 = time.perf_counter()
        ils(sol, ILS_VARIANTS[1], params, ctx, rng)
        t_chain = time.perf_counter() - t0
        label = "measured"
    else:
        t_chain = t_int * (params.ils_no_improve or inst.N)
        label = "lower bound"
    total = inst.K * t_build + params.n_ils * t_chain
    print(f"constructive IRRP      {t_build:8.2f}s  (x{inst.K})")
    print(f"one intensification    {t_int:8.2f}s")
    print(f"one ILS chain          {t_chain:8.2f}s  ({label})")
    print(f"projected run          {total:8.0f}s  = {total / 3600:.1f} h")


if __name__ == "__main__":
    main()

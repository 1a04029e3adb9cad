"""Removal operators, best insertion and the remove/repair perturbation."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .model import Instance
from .route_eval import EMPTY, Solution, _join, eval_splice, singles, tech_feasible

CRITERIA = ("duration", "travel")


@dataclass(frozen=True, order=True)
class InsertionMove:
    cost: float
    task: int
    route: int
    position: int
    with_depot: bool = False


def _criterion_index(criterion: str) -> int:
    if criterion == "duration":
        return 0
    if criterion == "travel":
        return 1
    raise ValueError(f"unknown criterion {criterion!r}")


def route_insertions(sol: Solution, k: int, task: int, criterion: str, with_depot: bool = False):
    """Yield every feasible insertion of ``task`` into route ``k`` as InsertionMove."""
    inst = sol.inst
    r = sol.routes[k]
    s = singles(inst)
    travel = inst.travel
    node_stats = s[inst.task_node(task)]
    if with_depot:
        if r.depot_index() >= 0:
            return
        node_stats = _join(s[0], node_stats, travel)
    use_travel = _criterion_index(criterion)
    old_d, old_c = r.duration, r.travel_cost
    fwd, bwd = r.fwd, r.bwd
    for pos in range(1, len(r.visits)):
        new = _join(_join(fwd[pos - 1], node_stats, travel), bwd[pos], travel)
        if not tech_feasible(new, k, inst):
            continue
        cost = new.travel - old_c if use_travel else new.duration - old_d
        yield InsertionMove(cost, task, k, pos, with_depot)


def _best_in_route(sol, k, task, criterion, with_depot=False):
    best = None
    for mv in route_insertions(sol, k, task, criterion, with_depot):
        if best is None or mv.cost < best.cost:
            best = mv
    return best


def apply_insertion(sol: Solution, mv: InsertionMove) -> None:
    sol.insert_task(mv.task, mv.route, mv.position, mv.with_depot)


DEPOT_SCOPES = ("global", "route")


def best_insertion(sol: Solution, tasks, criterion: str = "duration",
                   depot_scope: str = "route") -> list[int]:
    """Greedy best insertion driven by a heap of per-route best moves.

    Only the last modified route is re-scanned after each insertion; stale
    heap entries are skipped on pop.  A task that has no feasible plain
    insertion anywhere may be inserted together with a central-depot visit
    placed right before it.  With ``depot_scope="route"`` that fallback is
    decided per route instead: a depot insertion into route k competes as
    soon as the task has no plain insertion in k.  Returns the tasks left
    unscheduled (sorted).
    """
    if depot_scope not in DEPOT_SCOPES:
        raise ValueError(f"unknown depot scope {depot_scope!r}")
    per_route = depot_scope == "route"
    inst = sol.inst
    pending = {t for t in tasks if sol.where[t] < 0}
    if not pending:
        return []
    plain = {t: {} for t in pending}
    depot = {t: {} for t in pending}
    version = [0] * inst.K
    heap = []
    compat = inst.compat

    def push(mv, ver):
        heapq.heappush(heap, (mv.cost, mv.task, mv.route, mv.position, mv.with_depot, ver))

    def scan(k):
        version[k] += 1
        ver = version[k]
        newly_blocked = []
        for t in sorted(pending):
            if k not in compat[t]:
                continue
            had_plain = bool(plain[t])
            pm = _best_in_route(sol, k, t, criterion)
            if pm is not None:
                plain[t][k] = pm
                depot[t].pop(k, None)
                push(pm, ver)
            else:
                plain[t].pop(k, None)
                dm = _best_in_route(sol, k, t, criterion, with_depot=True)
                if dm is not None:
                    depot[t][k] = dm
                    push(dm, ver)
                else:
                    depot[t].pop(k, None)
                if had_plain and not plain[t] and not per_route:
                    newly_blocked.append(t)
        for t in newly_blocked:
            for kk, dm in depot[t].items():
                push(dm, version[kk])

    for k in range(inst.K):
        scan(k)
    while heap:
        cost, t, k, pos, wd, ver = heapq.heappop(heap)
        if t not in pending or ver != version[k]:
            continue
        if wd and (k in plain[t] if per_route else plain[t]):
            continue
        sol.insert_task(t, k, pos, wd)
        pending.discard(t)
        del plain[t], depot[t]
        if not pending:
            break
        scan(k)
    return sorted(pending)


def best_insertion_naive(sol: Solution, tasks, criterion: str = "duration",
                         depot_scope: str = "route") -> list[int]:
    """Reference implementation: full re-evaluation of every move each round."""
    if depot_scope not in DEPOT_SCOPES:
        raise ValueError(f"unknown depot scope {depot_scope!r}")
    inst = sol.inst
    pending = {t for t in tasks if sol.where[t] < 0}
    while pending:
        best = None
        for t in sorted(pending):
            moves = [mv for k in sorted(inst.compat[t])
                     for mv in route_insertions(sol, k, t, criterion)]
            if depot_scope == "route":
                plain_routes = {mv.route for mv in moves}
                moves += [mv for k in sorted(inst.compat[t]) if k not in plain_routes
                          for mv in route_insertions(sol, k, t, criterion, with_depot=True)]
            elif not moves:
                moves = [mv for k in sorted(inst.compat[t])
                         for mv in route_insertions(sol, k, t, criterion, with_depot=True)]
            for mv in moves:
                if best is None or mv < best:
                    best = mv
        if best is None:
            break
        apply_insertion(sol, best)
        pending.discard(best.task)
    return sorted(pending)


# -- removal operators ------------------------------------------------------

def random_removal(sol: Solution, d: int, rng) -> list[int]:
    if d < 1:
        raise ValueError("removal count must be >= 1")
    scheduled = sol.scheduled_tasks()
    chosen = rng.sample(scheduled, min(d, len(scheduled)))
    for t in chosen:
        sol.remove_task(t)
    return chosen


def removal_saving(sol: Solution, task: int, criterion: str) -> tuple[bool, float]:
    """(feasible, criterion decrease) obtained by removing a scheduled task."""
    r = sol.routes[sol.where[task]]
    p = r.pos[sol.inst.task_node(task)]
    ok, dd, dc = eval_splice(r, p, p, EMPTY)
    return ok, -(dc if criterion == "travel" else dd)


def worst_removal(sol: Solution, d: int, criterion: str = "duration") -> list[int]:
    """Repeatedly remove the task whose removal saves the most (ties: lowest id)."""
    if d < 1:
        raise ValueError("removal count must be >= 1")
    _criterion_index(criterion)
    removed = []
    for _ in range(min(d, sol.n_scheduled())):
        best_t, best_key = -1, None
        for t in sol.scheduled_tasks():
            ok, saving = removal_saving(sol, t, criterion)
            key = (ok, saving)
            if best_key is None or key > best_key:
                best_t, best_key = t, key
        sol.remove_task(best_t)
        removed.append(best_t)
    return removed


def _relatedness_scales(inst: Instance):
    cached = inst.__dict__.get("_shaw_scales")
    if cached is None:
        nodes = [t.location for t in inst.tasks]
        t_max = max((inst.travel[a][b] for a in nodes for b in nodes), default=0.0)
        horizon = max(inst.node_l) - min(inst.node_e) if inst.n_nodes else 0.0
        cached = (t_max if t_max > 0 else 1.0,
                  horizon if horizon > 0 and math.isfinite(horizon) else 1.0)
        object.__setattr__(inst, "_shaw_scales", cached)
    return cached


def shaw_relatedness(inst: Instance, i: int, j: int, phi1: float = 1.0, phi2: float = 1.0) -> float:
    """Normalised spatial + temporal distance between two tasks (lower = more related)."""
    if i == j:
        raise ValueError("relatedness needs two distinct tasks")
    t_max, horizon = _relatedness_scales(inst)
    a, b = inst.tasks[i], inst.tasks[j]
    return (phi1 * inst.travel[a.location][b.location] / t_max
            + phi2 * abs(a.tw_open - b.tw_open) / horizon)


def sequence_length(d_max: int, d0: int = 3) -> int:
    """Block length used by sequence-related removal: 3, growing with the degree, at most 6."""
    return max(1, min(3 + max(d_max - d0, 0) // 3, 6))


def _block(sol: Solution, seed: int, budget: int) -> list[int]:
    """Contiguous run of task visits starting at ``seed``, shifted left if the route ends first."""
    inst = sol.inst
    r = sol.routes[sol.where[seed]]
    v = r.visits
    K = inst.K
    p = r.pos[inst.task_node(seed)]
    lo = hi = p
    while hi - lo + 1 < budget and hi + 1 < len(v) and v[hi + 1] > K:
        hi += 1
    while hi - lo + 1 < budget and lo - 1 > 0 and v[lo - 1] > K:
        lo -= 1
    return [inst.node_task(x) for x in v[lo:hi + 1]]


def sequence_related_removal(sol: Solution, d: int, rng, length: int = 3,
                             phi: tuple = (1.0, 1.0), trace: list | None = None) -> list[int]:
    """Remove blocks of consecutive visits following related seeds on distinct routes."""
    if d < 1:
        raise ValueError("removal count must be >= 1")
    scheduled = sol.scheduled_tasks()
    if not scheduled:
        return []
    inst = sol.inst
    length = max(1, length)
    n_seeds = math.ceil(d / length)
    first = scheduled[int(rng.random() * len(scheduled))]
    seeds = [first]
    used = {sol.where[first]}
    if n_seeds > 1:
        ranked = sorted((shaw_relatedness(inst, first, j, *phi), j) for j in scheduled if j != first)
        for _, j in ranked:
            if len(seeds) == n_seeds:
                break
            if sol.where[j] not in used:
                seeds.append(j)
                used.add(sol.where[j])
    blocks = []
    left = d
    for s in seeds:
        b = _block(sol, s, min(length, left))
        blocks.append(b)
        left -= len(b)
        if left <= 0:
            break
    if trace is not None:
        trace.extend((sol.where[b[0]], b) for b in blocks)
    removed = [t for b in blocks for t in b]
    for t in removed:
        sol.remove_task(t)
    return removed


def removal_repair_perturbation(sol: Solution, d_max: int, criterion: str, rng,
                                operators=(1, 2, 3), seq_length: int = 3,
                                depot_scope: str = "route") -> Solution:
    """Remove 1..d_max tasks with a randomly chosen operator, then repair.

    Operator 1 is random removal, 2 worst removal and 3 sequence-related
    removal.  Previously unscheduled tasks are re-inserted first.
    """
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    unscheduled = sorted(sol.unscheduled)
    op = operators[int(rng.random() * len(operators))]
    count = 1 + int(rng.random() * d_max)
    if op == 1:
        removed = random_removal(sol, count, rng)
    elif op == 2:
        removed = worst_removal(sol, count, criterion)
    else:
        removed = sequence_related_removal(sol, count, rng, seq_length)
    best_insertion(sol, unscheduled, criterion, depot_scope)
    best_insertion(sol, removed, criterion, depot_scope)
    return sol

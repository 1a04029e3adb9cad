"""Independent feasibility audit and fitness recomputation.

Nothing here uses the segment calculus of :mod:`trsp.route_eval`: schedules
are simulated node by node and the best departure time is found by
enumerating the breakpoints of the completion-time function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Instance

TOL = 1e-7


def simulate(inst: Instance, nodes, start: float):
    """Forward schedule from a service start at ``nodes[0]``.

    Returns (service start times, completion time, violated) where
    ``violated`` is True if some window is missed.
    """
    e, l, d, t = inst.node_e, inst.node_l, inst.node_service, inst.travel
    h = [start]
    violated = start > l[nodes[0]] + TOL or start < e[nodes[0]] - TOL
    for a, b in zip(nodes, nodes[1:]):
        arr = h[-1] + d[a] + t[a][b]
        hb = arr if arr > e[b] else e[b]
        if hb > l[b] + TOL:
            violated = True
        h.append(hb)
    return h, h[-1] + d[nodes[-1]], violated


def latest_start(inst: Instance, nodes) -> float:
    l, d, t = inst.node_l, inst.node_service, inst.travel
    late = l[nodes[-1]]
    for a, b in zip(reversed(nodes[:-1]), reversed(nodes[1:])):
        late = min(l[a], late - d[a] - t[a][b])
    return late


def min_duration(inst: Instance, nodes) -> tuple[bool, float]:
    """(time-window feasible, minimum elapsed time) of a visit sequence."""
    if not nodes:
        return True, 0.0
    e, d, t = inst.node_e, inst.node_service, inst.travel
    lo = e[nodes[0]]
    hi = latest_start(inst, nodes)
    if simulate(inst, nodes, lo)[2] or hi < lo - TOL:
        return False, float("nan")
    hi = max(hi, lo)
    cands = {lo, hi}
    cum = 0.0
    for a, b in zip(nodes, nodes[1:]):
        cum += d[a] + t[a][b]
        s = e[b] - cum
        if lo < s < hi:
            cands.add(s)
    best = float("inf")
    for s in cands:
        _, end, _ = simulate(inst, nodes, s)
        best = min(best, end - s)
    return True, best


@dataclass
class RouteAudit:
    k: int
    feasible: bool
    duration: float
    travel: float
    reasons: list = field(default_factory=list)


def audit_route(inst: Instance, k: int, visits) -> RouteAudit:
    reasons = []
    tech = inst.technicians[k]
    home = tech.home_depot
    if len(visits) < 2 or visits[0] != home or visits[-1] != home:
        reasons.append("route must start and end at the home depot")
    if list(visits).count(0) > 1:
        reasons.append("central depot visited more than once")
    tools = [0] * inst.n_tools
    parts = [0] * inst.n_parts
    replenished = False
    for v in visits[1:-1]:
        if v == 0:
            replenished = True
            continue
        if 1 <= v <= inst.K:
            reasons.append(f"home depot {v} inside route")
            continue
        task = inst.tasks[inst.node_task(v)]
        if not all(h or not q for q, h in zip(task.skill_need, tech.skill_has)):
            reasons.append(f"skill missing for task {task.id}")
        if not replenished:
            for p, dem in enumerate(task.part_demand):
                parts[p] += dem
            for ti, need in enumerate(task.tool_need):
                tools[ti] += int(need)
    for ti, cnt in enumerate(tools):
        if cnt > 0 and not tech.tool_onboard[ti]:
            reasons.append(f"tool {ti} needed before replenishment")
    for p, cnt in enumerate(parts):
        if cnt > tech.part_inventory[p]:
            reasons.append(f"part {p} demand {cnt} exceeds inventory {tech.part_inventory[p]}")
    travel = sum(inst.travel[a][b] for a, b in zip(visits, visits[1:]))
    if len(visits) <= 2:
        return RouteAudit(k, not reasons, 0.0, travel, reasons)
    ok, dur = min_duration(inst, list(visits))
    if not ok:
        reasons.append("time windows violated")
    return RouteAudit(k, not reasons, dur, travel, reasons)


@dataclass
class SolutionAudit:
    feasible: bool
    duration: float
    fitness: float
    travel: float
    routes: list
    problems: list


def audit_solution(inst: Instance, visits_per_route, unscheduled, penalty: float = 1e3) -> SolutionAudit:
    problems = []
    if len(visits_per_route) != inst.K:
        problems.append(f"expected {inst.K} routes, got {len(visits_per_route)}")
    count = [0] * inst.N
    routes = []
    for k, visits in enumerate(visits_per_route):
        for v in visits:
            if not 0 <= v < inst.n_nodes:
                problems.append(f"route {k}: unknown node {v}")
        if problems:
            continue
        for v in visits[1:-1]:
            if v > inst.K:
                count[inst.node_task(v)] += 1
        ra = audit_route(inst, k, visits)
        routes.append(ra)
        problems.extend(f"route {k}: {r}" for r in ra.reasons)
    unscheduled = set(unscheduled)
    for t in range(inst.N):
        c = count[t] + (t in unscheduled)
        if c != 1:
            problems.append(f"task {t} appears {c} times")
    duration = sum(r.duration for r in routes)
    travel = sum(r.travel for r in routes)
    return SolutionAudit(not problems, duration, duration + penalty * len(unscheduled),
                         travel, routes, problems)


def audit(sol) -> SolutionAudit:
    """Audit a :class:`~trsp.route_eval.Solution` using only its visit lists."""
    return audit_solution(sol.inst, sol.visits(), sol.unscheduled, sol.penalty)

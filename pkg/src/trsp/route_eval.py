"""Constant-time route evaluation.

Every visit sequence is summarised by a :class:`SegmentStats` computed under
its earliest schedule (service at the first node starts at that node's
opening time).  Two summaries combine in O(1) with :func:`concat`, so a
move on a route is evaluated as ``prefix + replacement + suffix`` using the
prefix/suffix caches kept on :class:`Route`.

Duration follows the passive-time-slack rule: departure from the first node
may be postponed by ``PTS = min(FTS, TWT)`` without delaying the end, so

    duration = h_last + service_last - h_first - PTS
"""

from __future__ import annotations

from typing import Iterable

from .model import Instance, unpack

EPS = 1e-9
PENALTY = 1e3


class SegmentStats:
    __slots__ = ("first", "last", "h_first", "h_last", "end", "fts", "twt",
                 "travel", "service", "tools", "parts", "skills", "depot",
                 "feasible", "n")

    def __init__(self, first, last, h_first, h_last, end, fts, twt, travel,
                 service, tools, parts, skills, depot, feasible, n):
        self.first = first
        self.last = last
        self.h_first = h_first
        self.h_last = h_last
        self.end = end  # h_last + service time of the last node
        self.fts = fts
        self.twt = twt
        self.travel = travel
        self.service = service
        self.tools = tools
        self.parts = parts
        self.skills = skills
        self.depot = depot
        self.feasible = feasible
        self.n = n

    @property
    def earliest_start(self) -> float:
        return self.h_first

    @property
    def pts(self) -> float:
        return self.fts if self.fts < self.twt else self.twt

    @property
    def bs(self) -> float:
        # summaries are anchored at the earliest schedule: h_1 = e_1
        return 0.0

    @property
    def wt_first(self) -> float:
        return 0.0

    @property
    def duration(self) -> float:
        if self.n == 0:
            return 0.0
        pts = self.fts if self.fts < self.twt else self.twt
        return self.end - self.h_first - pts

    tw_feasible = property(lambda self: self.feasible)
    depot_visited = property(lambda self: self.depot)
    total_service = property(lambda self: self.service)

    def ren_acc(self, inst: Instance) -> tuple[int, ...]:
        return unpack(self.tools, inst.n_tools)

    def nonren_acc(self, inst: Instance) -> tuple[int, ...]:
        return unpack(self.parts, inst.n_parts)

    def skill_acc(self, inst: Instance) -> tuple[int, ...]:
        return unpack(self.skills, inst.n_skills)

    def __repr__(self):
        if self.n == 0:
            return "SegmentStats(<empty>)"
        return (f"SegmentStats({self.first}->{self.last}, n={self.n}, "
                f"dur={self.duration:.4f}, fts={self.fts:.4f}, twt={self.twt:.4f}, "
                f"feasible={self.feasible}, depot={self.depot})")


EMPTY = SegmentStats(-1, -1, 0.0, 0.0, 0.0, float("inf"), 0.0, 0.0, 0.0,
                     0, 0, 0, False, True, 0)


def _join(a: SegmentStats, b: SegmentStats, travel) -> SegmentStats:
    """Concatenate two non-empty summaries."""
    arrival = a.end + travel[a.last][b.first]
    shift = arrival - b.h_first
    if shift > 0.0:
        # service at b.first starts later: the delay is absorbed by b's waiting
        # time first and violates a window once it exceeds b's forward slack
        feasible = a.feasible and b.feasible and shift <= b.fts + EPS
        delay = shift - b.twt if shift > b.twt else 0.0
        h_last = b.h_last + delay
        end = b.end + delay
        fb = a.twt + b.fts - shift
        twt = a.twt + (b.twt - shift if b.twt > shift else 0.0)
    else:
        # arriving early: wait at b.first, b's own schedule is unchanged
        feasible = a.feasible and b.feasible
        h_last = b.h_last
        end = b.end
        fb = a.twt - shift + b.fts
        twt = a.twt - shift + b.twt
    fts = a.fts if a.fts < fb else fb
    if a.depot:
        tools, parts = a.tools, a.parts
    else:
        tools, parts = a.tools + b.tools, a.parts + b.parts
    return SegmentStats(a.first, b.last, a.h_first, h_last, end, fts, twt,
                        a.travel + travel[a.last][b.first] + b.travel,
                        a.service + b.service, tools, parts, a.skills + b.skills,
                        a.depot or b.depot, feasible, a.n + b.n)


def concat(a: SegmentStats, b: SegmentStats, inst: Instance) -> SegmentStats:
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    return _join(a, b, inst.travel)


def concat_all(parts: Iterable[SegmentStats], inst: Instance) -> SegmentStats:
    out = EMPTY
    travel = inst.travel
    for p in parts:
        if p.n == 0:
            continue
        out = p if out.n == 0 else _join(out, p, travel)
    return out


def stats_single(node: int, inst: Instance) -> SegmentStats:
    e, l = inst.node_e[node], inst.node_l[node]
    d = inst.node_service[node]
    return SegmentStats(node, node, e, e, e + d, l - e, 0.0, 0.0, d,
                        inst.node_tools[node], inst.node_parts[node],
                        inst.node_skills[node], node == 0, e <= l, 1)


def singles(inst: Instance) -> tuple[SegmentStats, ...]:
    """Per-node single-visit summaries, cached on the instance."""
    cached = inst.__dict__.get("_singles")
    if cached is None:
        cached = tuple(stats_single(v, inst) for v in range(inst.n_nodes))
        object.__setattr__(inst, "_singles", cached)
    return cached


def sequence_stats(nodes: Iterable[int], inst: Instance) -> SegmentStats:
    s = singles(inst)
    return concat_all((s[v] for v in nodes), inst)


def resources_ok(stats: SegmentStats, k: int, inst: Instance) -> bool:
    return ((inst.tech_parts_cap[k] - stats.parts) & inst.parts_guard) == inst.parts_guard \
        and not (stats.tools & inst.tech_tool_missing[k])


def tech_feasible(stats: SegmentStats, k: int, inst: Instance) -> bool:
    """Full feasibility of a home-to-home route summary for technician ``k``."""
    return stats.feasible \
        and ((inst.tech_parts_cap[k] - stats.parts) & inst.parts_guard) == inst.parts_guard \
        and not (stats.tools & inst.tech_tool_missing[k]) \
        and not (stats.skills & inst.tech_skill_missing[k])


def feasible_for(stats: SegmentStats, k: int, inst: Instance) -> tuple[bool, str]:
    """Feasibility verdict with the first failing reason ("" when feasible)."""
    if stats.tools & inst.tech_tool_missing[k]:
        return False, "tool"
    if ((inst.tech_parts_cap[k] - stats.parts) & inst.parts_guard) != inst.parts_guard:
        return False, "parts"
    if stats.skills & inst.tech_skill_missing[k]:
        return False, "skill"
    if not stats.feasible:
        return False, "time-window"
    return True, ""


class Route:
    """One technician's visit sequence with prefix/suffix summary caches.

    ``fwd[i]`` summarises ``visits[0..i]``, ``bwd[i]`` summarises
    ``visits[i..]`` and ``inner[i]`` summarises ``visits[i..m-1]`` (the
    suffix without the closing home depot, used when tails change owner).
    """

    __slots__ = ("inst", "k", "visits", "fwd", "bwd", "inner", "pos")

    def __init__(self, inst: Instance, k: int, visits=None):
        self.inst = inst
        self.k = k
        home = inst.technicians[k].home_depot
        self.visits = list(visits) if visits is not None else [home, home]
        self.rebuild()

    def rebuild(self) -> "Route":
        inst = self.inst
        s = singles(inst)
        travel = inst.travel
        v = self.visits
        m = len(v) - 1
        fwd = [None] * (m + 1)
        acc = s[v[0]]
        fwd[0] = acc
        for i in range(1, m + 1):
            acc = _join(acc, s[v[i]], travel)
            fwd[i] = acc
        bwd = [None] * (m + 1)
        inner = [EMPTY] * (m + 1)
        acc = s[v[m]]
        bwd[m] = acc
        inn = EMPTY
        for i in range(m - 1, -1, -1):
            si = s[v[i]]
            acc = _join(si, acc, travel)
            bwd[i] = acc
            inn = si if inn.n == 0 else _join(si, inn, travel)
            inner[i] = inn
        self.fwd, self.bwd, self.inner = fwd, bwd, inner
        self.pos = {node: i for i, node in enumerate(v)}
        return self

    def copy(self) -> "Route":
        r = Route.__new__(Route)
        r.inst, r.k = self.inst, self.k
        r.visits = self.visits[:]
        r.fwd, r.bwd, r.inner = self.fwd, self.bwd, self.inner
        r.pos = self.pos
        return r

    @property
    def stats(self) -> SegmentStats:
        return self.fwd[-1]

    @property
    def duration(self) -> float:
        return self.fwd[-1].duration if len(self.visits) > 2 else 0.0

    @property
    def travel_cost(self) -> float:
        return self.fwd[-1].travel

    @property
    def prefix_stats(self):
        return self.fwd

    @property
    def suffix_stats(self):
        return self.bwd

    def is_empty(self) -> bool:
        return len(self.visits) <= 2

    def tasks(self) -> list[int]:
        K = self.inst.K
        return [v - K - 1 for v in self.visits if v > K]

    def depot_index(self) -> int:
        return self.pos.get(0, -1)

    def feasible(self) -> bool:
        return tech_feasible(self.fwd[-1], self.k, self.inst)

    def segment(self, i: int, j: int) -> SegmentStats:
        """Summary of visits[i..j] (inclusive); EMPTY when j < i."""
        return sequence_stats(self.visits[i:j + 1], self.inst)

    def __repr__(self):
        return f"Route(k={self.k}, visits={self.visits})"


def route_value(stats: SegmentStats, n_visits: int) -> float:
    return stats.duration if n_visits > 2 else 0.0


def eval_insertion(route: Route, pos: int, task: int) -> tuple[bool, float, float]:
    """Insert ``task`` before ``visits[pos]``: (feasible, d_duration, d_travel)."""
    inst = route.inst
    node = inst.task_node(task)
    if not 0 < pos < len(route.visits):
        raise IndexError(f"insertion position {pos} outside 1..{len(route.visits) - 1}")
    travel = inst.travel
    new = _join(_join(route.fwd[pos - 1], singles(inst)[node], travel), route.bwd[pos], travel)
    ok = tech_feasible(new, route.k, inst)
    return ok, new.duration - route.duration, new.travel - route.travel_cost


def eval_splice(route: Route, i: int, j: int, replacement: SegmentStats) -> tuple[bool, float, float]:
    """Replace ``visits[i..j]`` by a sequence summarised by ``replacement``.

    ``j == i - 1`` denotes a pure insertion before ``visits[i]``.
    """
    m = len(route.visits) - 1
    if not (1 <= i <= j + 1 and j <= m - 1):
        raise IndexError(f"splice range {i}..{j} outside 1..{m - 1}")
    inst = route.inst
    travel = inst.travel
    left = route.fwd[i - 1]
    if replacement.n:
        left = _join(left, replacement, travel)
    new = _join(left, route.bwd[j + 1], travel)
    n_visits = m + 1 - (j - i + 1) + replacement.n
    ok = tech_feasible(new, route.k, inst)
    return ok, route_value(new, n_visits) - route.duration, new.travel - route.travel_cost


def depot_visit_relevant(route: Route) -> bool:
    """True if the route's tools/parts requirements need its central-depot visit."""
    d = route.depot_index()
    if d < 0:
        return False
    without = _join(route.fwd[d - 1], route.bwd[d + 1], route.inst.travel)
    return not resources_ok(without, route.k, route.inst)


def drop_depot_if_redundant(route: Route) -> bool:
    d = route.depot_index()
    if d < 0:
        return False
    without = _join(route.fwd[d - 1], route.bwd[d + 1], route.inst.travel)
    if not tech_feasible(without, route.k, route.inst):
        return False
    del route.visits[d]
    route.rebuild()
    return True


def rebuild_caches(route: Route) -> Route:
    return route.rebuild()


class Solution:
    """Routes for every technician plus the unscheduled task pool."""

    __slots__ = ("inst", "routes", "unscheduled", "where", "penalty")

    def __init__(self, inst: Instance, routes=None, unscheduled=None, penalty: float = PENALTY):
        self.inst = inst
        self.penalty = penalty
        if routes is None:
            routes = [Route(inst, k) for k in range(inst.K)]
        self.routes = routes
        self.where = [-1] * inst.N
        for r in routes:
            for t in r.tasks():
                self.where[t] = r.k
        if unscheduled is None:
            unscheduled = {t for t in range(inst.N) if self.where[t] < 0}
        self.unscheduled = set(unscheduled)

    @classmethod
    def from_visits(cls, inst: Instance, visits_per_route, unscheduled=None, penalty=PENALTY):
        routes = [Route(inst, k, v) for k, v in enumerate(visits_per_route)]
        return cls(inst, routes, unscheduled, penalty)

    def copy(self) -> "Solution":
        s = Solution.__new__(Solution)
        s.inst = self.inst
        s.penalty = self.penalty
        s.routes = [r.copy() for r in self.routes]
        s.unscheduled = set(self.unscheduled)
        s.where = self.where[:]
        return s

    @property
    def duration_total(self) -> float:
        return sum(r.duration for r in self.routes)

    @property
    def travel_total(self) -> float:
        return sum(r.travel_cost for r in self.routes)

    @property
    def fitness(self) -> float:
        return self.duration_total + self.penalty * len(self.unscheduled)

    def value(self, criterion: str) -> float:
        if criterion == "duration":
            return self.fitness
        return self.travel_total + self.penalty * len(self.unscheduled)

    def n_scheduled(self) -> int:
        return self.inst.N - len(self.unscheduled)

    def scheduled_tasks(self) -> list[int]:
        return [t for t in range(self.inst.N) if self.where[t] >= 0]

    def set_visits(self, k: int, visits) -> None:
        r = self.routes[k]
        for t in r.tasks():
            if self.where[t] == k:
                self.where[t] = -1
        r.visits = list(visits)
        r.rebuild()
        for t in r.tasks():
            self.where[t] = k

    def insert_task(self, task: int, k: int, pos: int, with_depot: bool = False) -> None:
        r = self.routes[k]
        node = self.inst.task_node(task)
        if with_depot:
            r.visits[pos:pos] = [0, node]
        else:
            r.visits.insert(pos, node)
        r.rebuild()
        self.where[task] = k
        self.unscheduled.discard(task)

    def remove_task(self, task: int, check_depot: bool = True) -> int:
        k = self.where[task]
        if k < 0:
            raise ValueError(f"task {task} is not scheduled")
        r = self.routes[k]
        del r.visits[r.pos[self.inst.task_node(task)]]
        r.rebuild()
        self.where[task] = -1
        self.unscheduled.add(task)
        if check_depot and r.depot_index() >= 0:
            drop_depot_if_redundant(r)
        return k

    def visits(self) -> list[list[int]]:
        return [r.visits[:] for r in self.routes]

    def signature(self) -> tuple:
        return tuple(tuple(r.visits) for r in self.routes)

    def check(self) -> list[str]:
        """Structural and feasibility problems found via the caches."""
        inst = self.inst
        errs = []
        seen = {}
        for r in self.routes:
            home = inst.home(r.k)
            if r.visits[0] != home or r.visits[-1] != home:
                errs.append(f"route {r.k} does not start and end at its home depot")
            if r.visits.count(0) > 1:
                errs.append(f"route {r.k} visits the central depot more than once")
            for v in r.visits[1:-1]:
                kind = inst.node_kind(v)
                if kind == "home":
                    errs.append(f"route {r.k} passes through home depot {v}")
                elif kind == "task":
                    t = inst.node_task(v)
                    if t in seen:
                        errs.append(f"task {t} appears twice")
                    seen[t] = r.k
                    if r.k not in inst.compat[t]:
                        errs.append(f"task {t} is not compatible with technician {r.k}")
            if not r.feasible():
                errs.append(f"route {r.k} infeasible ({feasible_for(r.stats, r.k, inst)[1]})")
        for t in range(inst.N):
            in_route = t in seen
            if in_route == (t in self.unscheduled):
                errs.append(f"task {t} partition violated")
            if self.where[t] != seen.get(t, -1):
                errs.append(f"task {t} location index stale")
        return errs

    def __repr__(self):
        return f"Solution(fitness={self.fitness:.3f}, unscheduled={sorted(self.unscheduled)})"

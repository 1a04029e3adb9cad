"""Local-search neighbourhoods with nearest-predecessor pruning.

Every operator is a generator of :class:`Move` objects whose ``delta`` (change
in total duration) lies in ``[lo, hi)``.  The descent driver takes the first
improving move, applies it and restarts the scan; the perturbation phase and
the tests draw from the same generators with other bounds.

The central depot never leaves its route: only ``shift1`` may reposition it,
and sequences containing it are not moved, swapped or reversed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .model import Instance
from .route_eval import EMPTY, Solution, _join, singles, tech_feasible

IMPROVE_EPS = 1e-6
INF = math.inf

SWAP_SEQUENCE_PAIRS = ((2, 2), (3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3), (4, 4))
INTENSIFY_SWAP_SEQUENCE_PAIRS = ((3, 1), (3, 2), (3, 3))


class Move(NamedTuple):
    delta: float
    apply: Callable[[], None]
    tasks: tuple


def pred_distance(inst: Instance, j: int, i: int) -> float:
    """dist(j, i) = max(max(0, e_i - l_j), t_ji) for predecessor j of task i."""
    a, b = inst.tasks[j], inst.tasks[i]
    return max(max(0.0, b.tw_open - a.tw_close), inst.travel[a.location][b.location])


def arc_possible(inst: Instance, j: int, i: int) -> bool:
    a, b = inst.tasks[j], inst.tasks[i]
    return a.tw_open + a.service_time + inst.travel[a.location][b.location] <= b.tw_close + 1e-9


def build_predecessors(inst: Instance, chi: int = 30) -> tuple:
    """Per task, up to ``chi`` nearest feasible predecessors (ties by id)."""
    if chi < 1:
        raise ValueError("chi must be >= 1")
    out = []
    for i in range(inst.N):
        cand = sorted((pred_distance(inst, j, i), j) for j in range(inst.N)
                      if j != i and arc_possible(inst, j, i))
        out.append(tuple(j for _, j in cand[:chi]))
    return tuple(out)


@dataclass
class SearchContext:
    inst: Instance
    chi: int = 30
    preds: tuple = None
    counters: list = None
    applied: int = 0
    trace: list | None = None  # optional record of (operator, delta) for applied moves
    pair_cache: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.preds is None:
            self.preds = build_predecessors(self.inst, self.chi)
        if self.counters is None:
            self.counters = [0] * self.inst.N

    def record(self, mv: Move, name: str = "") -> None:
        for t in mv.tasks:
            if t >= 0:
                self.counters[t] += 1
        self.applied += 1
        if self.trace is not None:
            self.trace.append((name, mv.delta))


def _cat(a, b, travel):
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    return _join(a, b, travel)


def _value(stats) -> float:
    # a route holding no task is worth nothing, even if it still lists the depot
    if stats.n - 2 - stats.depot <= 0:
        return 0.0
    return stats.duration


def _clean(visits: list) -> list:
    if len(visits) == 3 and visits[1] == 0:
        return [visits[0], visits[-1]]
    return visits


def _set(sol: Solution, k: int, visits: list) -> None:
    sol.set_visits(k, _clean(visits))


def _seg(inst, nodes):
    s = singles(inst)
    out = EMPTY
    for v in nodes:
        out = _cat(out, s[v], inst.travel)
    return out


def _all_tasks(visits, lo, hi, K) -> bool:
    """True if visits[lo:hi] are all task nodes."""
    for x in visits[lo:hi]:
        if x <= K:
            return False
    return True


def _anchors(sol: Solution, ctx: SearchContext, j: int, own: int, pruned: bool):
    """(route, position) pairs after which material from ``j``'s route may be placed.

    Pruned mode: positions of the nearest predecessors of ``j`` plus the
    start of every other route.  Unpruned: every position of every other route.
    """
    inst = sol.inst
    if not pruned:
        for r in sol.routes:
            if r.k == own:
                continue
            for pp in range(len(r.visits) - 1):
                yield r.k, pp
        return
    where = sol.where
    for p in ctx.preds[j]:
        b = where[p]
        if b >= 0 and b != own:
            yield b, sol.routes[b].pos[inst.task_node(p)]
    for r in sol.routes:
        if r.k != own:
            yield r.k, 0


# -- inter-route ------------------------------------------------------------

def two_opt_star_moves(sol: Solution, ctx: SearchContext, lo=-INF, hi=INF, pruned=True):
    inst = sol.inst
    travel = inst.travel
    s = singles(inst)
    K = inst.K
    routes = sol.routes
    for A in routes:
        va = A.visits
        ma = len(va) - 1
        home_a = s[va[0]]
        for pj in range(1, ma):
            if va[pj] <= K:
                continue
            tail_a = A.inner[pj]
            if tail_a.depot:
                continue
            j = va[pj] - K - 1
            pre_a = A.fwd[pj - 1]
            for b, pp in _anchors(sol, ctx, j, A.k, pruned):
                B = routes[b]
                vb = B.visits
                tail_b = B.inner[pp + 1]
                if tail_b.depot:
                    continue
                new_a = _join(_cat(pre_a, tail_b, travel), home_a, travel)
                if not tech_feasible(new_a, A.k, inst):
                    continue
                new_b = _join(_cat(B.fwd[pp], tail_a, travel), s[vb[0]], travel)
                if not tech_feasible(new_b, b, inst):
                    continue
                delta = _value(new_a) + _value(new_b) - A.duration - B.duration
                if lo <= delta < hi:
                    p_task = vb[pp] - K - 1 if vb[pp] > K else -1

                    def apply(A=A, B=B, pj=pj, pp=pp):
                        va, vb = A.visits, B.visits
                        na = va[:pj] + vb[pp + 1:-1] + [va[0]]
                        nb = vb[:pp + 1] + va[pj:-1] + [vb[0]]
                        _set(sol, A.k, na)
                        _set(sol, B.k, nb)
                    yield Move(delta, apply, (j, p_task))


def swap_relocate_moves(sol: Solution, ctx: SearchContext, lo=-INF, hi=INF, pruned=True):
    """(1,0), (1,1), (2,0), (2,1) and the reversed-arc (2,0)r, (2,1)r moves."""
    inst = sol.inst
    travel = inst.travel
    s = singles(inst)
    K = inst.K
    routes = sol.routes
    for A in routes:
        va = A.visits
        ma = len(va) - 1
        for pj in range(1, ma):
            if va[pj] <= K:
                continue
            j = va[pj] - K - 1
            for a in (1, 2):
                if pj + a > ma or not _all_tasks(va, pj, pj + a, K):
                    continue
                nodes = va[pj:pj + a]
                variants = [(_seg(inst, nodes), False)]
                if a == 2:
                    variants.append((_seg(inst, nodes[::-1]), True))
                tasks = tuple(x - K - 1 for x in nodes)
                a_removed = _join(A.fwd[pj - 1], A.bwd[pj + a], travel)
                a_removed_ok = tech_feasible(a_removed, A.k, inst)
                a_removed_val = _value(a_removed)
                for b, pp in _anchors(sol, ctx, j, A.k, pruned):
                    B = routes[b]
                    vb = B.visits
                    mb = len(vb) - 1
                    old = A.duration + B.duration
                    x = vb[pp + 1] if pp + 1 <= mb - 1 and vb[pp + 1] > K else -1
                    for seg, rev in variants:
                        head = _join(B.fwd[pp], seg, travel)
                        # (a, 0): relocation
                        if a_removed_ok:
                            new_b = _join(head, B.bwd[pp + 1], travel)
                            if tech_feasible(new_b, b, inst):
                                delta = a_removed_val + _value(new_b) - old
                                if lo <= delta < hi:
                                    def apply(A=A, B=B, pj=pj, pp=pp, a=a, rev=rev):
                                        va, vb = A.visits, B.visits
                                        moved = va[pj:pj + a]
                                        if rev:
                                            moved = moved[::-1]
                                        _set(sol, A.k, va[:pj] + va[pj + a:])
                                        _set(sol, B.k, vb[:pp + 1] + moved + vb[pp + 1:])
                                    yield Move(delta, apply, tasks)
                        # (a, 1): interchange with the visit following the anchor
                        if x < 0:
                            continue
                        new_b = _join(head, B.bwd[pp + 2], travel)
                        if not tech_feasible(new_b, b, inst):
                            continue
                        new_a = _join(_join(A.fwd[pj - 1], s[x], travel), A.bwd[pj + a], travel)
                        if not tech_feasible(new_a, A.k, inst):
                            continue
                        delta = _value(new_a) + _value(new_b) - old
                        if lo <= delta < hi:
                            def apply(A=A, B=B, pj=pj, pp=pp, a=a, rev=rev):
                                va, vb = A.visits, B.visits
                                moved = va[pj:pj + a]
                                if rev:
                                    moved = moved[::-1]
                                xa = vb[pp + 1]
                                _set(sol, A.k, va[:pj] + [xa] + va[pj + a:])
                                _set(sol, B.k, vb[:pp + 1] + moved + vb[pp + 2:])
                            yield Move(delta, apply, tasks + (x - K - 1,))


def _travel_value(stats) -> float:
    if stats.n - 2 - stats.depot <= 0:
        return 0.0
    return stats.travel


def swap_sequence_moves(sol: Solution, ctx: SearchContext, pairs=SWAP_SEQUENCE_PAIRS,
                        lo=-INF, hi=INF, pruned=True, start_task: int | None = None,
                        criterion: str = "duration"):
    """Exchange a run of ``a`` visits with a run of ``k`` (1 <= k <= a) visits of another route.

    With ``criterion="travel"`` the reported delta is the travel-cost change.
    """
    for a, k in pairs:
        if not 1 <= k <= a:
            raise ValueError(f"invalid swap-sequence pair ({a},{k})")
    inst = sol.inst
    travel = inst.travel
    K = inst.K
    routes = sol.routes
    if start_task is None:
        starts = [(A, pj) for A in routes for pj in range(1, len(A.visits) - 1) if A.visits[pj] > K]
    else:
        A = routes[sol.where[start_task]]
        starts = [(A, A.pos[inst.task_node(start_task)])]
    if criterion not in ("duration", "travel"):
        raise ValueError(f"unknown criterion {criterion!r}")
    by_travel = criterion == "travel"
    val = _travel_value if by_travel else _value
    lengths = sorted({a for a, _ in pairs})
    for A, pj in starts:
        va = A.visits
        ma = len(va) - 1
        j = va[pj] - K - 1
        seg_a = {a: _seg(inst, va[pj:pj + a]) for a in lengths
                 if pj + a <= ma and _all_tasks(va, pj, pj + a, K)}
        if not seg_a:
            continue
        for b, pp in _anchors(sol, ctx, j, A.k, pruned):
            B = routes[b]
            vb = B.visits
            mb = len(vb) - 1
            old = A.travel_cost + B.travel_cost if by_travel else A.duration + B.duration
            seg_b = {}
            for a, k in pairs:
                sa = seg_a.get(a)
                if sa is None or pp + k > mb - 1:
                    continue
                sb = seg_b.get(k)
                if sb is None:
                    if not _all_tasks(vb, pp + 1, pp + 1 + k, K):
                        continue
                    sb = seg_b[k] = _seg(inst, vb[pp + 1:pp + 1 + k])
                new_b = _join(_join(B.fwd[pp], sa, travel), B.bwd[pp + 1 + k], travel)
                if not tech_feasible(new_b, b, inst):
                    continue
                new_a = _join(_join(A.fwd[pj - 1], sb, travel), A.bwd[pj + a], travel)
                if not tech_feasible(new_a, A.k, inst):
                    continue
                delta = val(new_a) + val(new_b) - old
                if lo <= delta < hi:
                    def apply(A=A, B=B, pj=pj, pp=pp, a=a, k=k):
                        va, vb = A.visits, B.visits
                        ra, rb = va[pj:pj + a], vb[pp + 1:pp + 1 + k]
                        _set(sol, A.k, va[:pj] + rb + va[pj + a:])
                        _set(sol, B.k, vb[:pp + 1] + ra + vb[pp + 1 + k:])
                    tasks = tuple(x - K - 1 for x in va[pj:pj + a] + vb[pp + 1:pp + 1 + k])
                    yield Move(delta, apply, tasks)


# -- intra-route ------------------------------------------------------------

def _intra_move(sol, r, new_visits_fn, tasks, delta):
    def apply():
        _set(sol, r.k, new_visits_fn(r.visits))
    return Move(delta, apply, tasks)


def exchange1_moves(sol: Solution, ctx: SearchContext, lo=-INF, hi=INF):
    inst = sol.inst
    travel = inst.travel
    s = singles(inst)
    K = inst.K
    for r in sol.routes:
        v = r.visits
        m = len(v) - 1
        old = r.duration
        for p in range(1, m - 1):
            if v[p] <= K:
                continue
            mid = EMPTY
            for q in range(p + 1, m):
                if q > p + 1:
                    mid = _cat(mid, s[v[q - 1]], travel)
                if v[q] <= K:
                    continue
                left = _join(r.fwd[p - 1], s[v[q]], travel)
                if not left.feasible:
                    continue
                new = _join(_join(_cat(left, mid, travel), s[v[p]], travel), r.bwd[q + 1], travel)
                if not tech_feasible(new, r.k, inst):
                    continue
                delta = _value(new) - old
                if lo <= delta < hi:
                    def nv(v, p=p, q=q):
                        w = v[:]
                        w[p], w[q] = w[q], w[p]
                        return w
                    yield _intra_move(sol, r, nv, (v[p] - K - 1, v[q] - K - 1), delta)


def _block_shift_moves(sol, lo, hi, sizes, allow_depot):
    inst = sol.inst
    travel = inst.travel
    s = singles(inst)
    K = inst.K
    for r in sol.routes:
        v = r.visits
        m = len(v) - 1
        old = r.duration
        for b in sizes:
            for p in range(1, m - b + 1):
                nodes = v[p:p + b]
                if b == 1:
                    if nodes[0] <= K and not (allow_depot and nodes[0] == 0):
                        continue
                elif not _all_tasks(v, p, p + b, K):
                    continue
                block = _seg(inst, nodes)
                tasks = tuple(x - K - 1 for x in nodes if x > K)
                # forward: place the block after v[q]
                mid = EMPTY
                pre = r.fwd[p - 1]
                for q in range(p + b, m):
                    mid = _cat(mid, s[v[q]], travel)
                    head = _join(pre, mid, travel)
                    if not head.feasible:
                        break
                    new = _join(_join(head, block, travel), r.bwd[q + 1], travel)
                    if not tech_feasible(new, r.k, inst):
                        continue
                    delta = _value(new) - old
                    if lo <= delta < hi:
                        def nv(v, p=p, q=q, b=b):
                            return v[:p] + v[p + b:q + 1] + v[p:p + b] + v[q + 1:]
                        yield _intra_move(sol, r, nv, tasks, delta)
                # backward: place the block before v[q]
                mid = EMPTY
                tail = r.bwd[p + b]
                for q in range(p - 1, 0, -1):
                    mid = _cat(s[v[q]], mid, travel)
                    new = _join(_join(_join(r.fwd[q - 1], block, travel), mid, travel), tail, travel)
                    if not tech_feasible(new, r.k, inst):
                        continue
                    delta = _value(new) - old
                    if lo <= delta < hi:
                        def nv(v, p=p, q=q, b=b):
                            return v[:q] + v[p:p + b] + v[q:p] + v[p + b:]
                        yield _intra_move(sol, r, nv, tasks, delta)


def shift1_moves(sol: Solution, ctx: SearchContext, lo=-INF, hi=INF):
    return _block_shift_moves(sol, lo, hi, (1,), allow_depot=True)


def r_opt_moves(sol: Solution, ctx: SearchContext, lo=-INF, hi=INF):
    return _block_shift_moves(sol, lo, hi, (2, 3), allow_depot=False)


def two_opt_moves(sol: Solution, ctx: SearchContext, lo=-INF, hi=INF):
    inst = sol.inst
    travel = inst.travel
    s = singles(inst)
    K = inst.K
    for r in sol.routes:
        v = r.visits
        m = len(v) - 1
        old = r.duration
        for p in range(1, m - 1):
            if v[p] <= K:
                continue
            rev = s[v[p]]
            for q in range(p + 1, m):
                if v[q] <= K:
                    break
                rev = _join(s[v[q]], rev, travel)
                if not rev.feasible:
                    break
                new = _join(_join(r.fwd[p - 1], rev, travel), r.bwd[q + 1], travel)
                if not tech_feasible(new, r.k, inst):
                    continue
                delta = _value(new) - old
                if lo <= delta < hi:
                    def nv(v, p=p, q=q):
                        return v[:p] + v[p:q + 1][::-1] + v[q + 1:]
                    yield _intra_move(sol, r, nv, tuple(x - K - 1 for x in v[p:q + 1]), delta)


# -- descent drivers --------------------------------------------------------

def descend(sol: Solution, ctx: SearchContext, moves_fn, name: str = "", **kw) -> bool:
    """Apply first-improvement moves from ``moves_fn`` until none is left."""
    improved = False
    while True:
        mv = next(moves_fn(sol, ctx, lo=-INF, hi=-IMPROVE_EPS, **kw), None)
        if mv is None:
            return improved
        mv.apply()
        ctx.record(mv, name)
        improved = True


def two_opt_star(sol, ctx, pruned=True) -> bool:
    return descend(sol, ctx, two_opt_star_moves, "2opt*", pruned=pruned)


def swap_relocate(sol, ctx, pruned=True) -> bool:
    return descend(sol, ctx, swap_relocate_moves, "swap-relocate", pruned=pruned)


def swap_sequence(sol, ctx, pairs=INTENSIFY_SWAP_SEQUENCE_PAIRS, pruned=True) -> bool:
    return descend(sol, ctx, swap_sequence_moves, "swap-sequence", pairs=pairs, pruned=pruned)


def exchange1(sol, ctx) -> bool:
    return descend(sol, ctx, exchange1_moves, "exchange1")


def shift1(sol, ctx) -> bool:
    return descend(sol, ctx, shift1_moves, "shift1")


def r_opt(sol, ctx) -> bool:
    return descend(sol, ctx, r_opt_moves, "r-opt")


def two_opt(sol, ctx) -> bool:
    return descend(sol, ctx, two_opt_moves, "2opt")


MOVE_FAMILIES = {
    "2opt*": two_opt_star_moves,
    "swap-relocate": swap_relocate_moves,
    "swap-sequence": swap_sequence_moves,
    "exchange1": exchange1_moves,
    "shift1": shift1_moves,
    "r-opt": r_opt_moves,
    "2opt": two_opt_moves,
}

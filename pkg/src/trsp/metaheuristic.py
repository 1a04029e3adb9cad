"""Enhanced iterated local search: IRRP, intensification, ILS variants, elite set."""

from __future__ import annotations

import math
import random
import time
from dataclasses import asdict, dataclass, field

from . import search_ops as so
from .construct import DEPOT_SCOPES, removal_repair_perturbation, sequence_length
from .model import Instance
from .route_eval import PENALTY, Solution

IMPROVE_EPS = 1e-6


@dataclass
class Params:
    d_max_intensify: int = 10
    n_ils: int = 600
    n_pop: int = 10
    d0: int = 3
    cv1: int = 45
    cv2: int = 30
    chi: int = 30
    penalty: float = PENALTY
    n_close_frac: float = 0.20
    seed: int = 0
    # None means "number of tasks" for the two iteration limits below
    ils_no_improve: int | None = None
    irrp_intensify_iters: int | None = None
    n_initial: int | None = None  # None: one constructive solution per technician
    reset_counters: bool = False
    time_limit: float | None = None  # wall-clock cap in seconds; breaks determinism
    depot_scope: str = "route"  # when best insertion may add a depot visit, see construct

    def validate(self) -> "Params":
        for name in ("d_max_intensify", "n_ils", "n_pop", "d0", "cv1", "cv2", "chi"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("ils_no_improve", "irrp_intensify_iters", "n_initial"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ValueError(f"{name} must be a positive integer or None, got {v!r}")
        if not self.penalty > 0:
            raise ValueError("penalty must be positive")
        if not 0 < self.n_close_frac <= 1:
            raise ValueError("n_close_frac must lie in (0, 1]")
        if self.depot_scope not in DEPOT_SCOPES:
            raise ValueError(f"depot_scope must be one of {DEPOT_SCOPES}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        return self

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class IlsVariant:
    id: int
    perturbation: str  # "remove-repair" or "local-search"
    criterion: str  # "duration" or "travel"


ILS_VARIANTS = {
    1: IlsVariant(1, "remove-repair", "duration"),
    2: IlsVariant(2, "remove-repair", "travel"),
    3: IlsVariant(3, "local-search", "duration"),
    4: IlsVariant(4, "local-search", "travel"),
}


def select_ils(i: int, lst_impr: int, cv1: int = 45, cv2: int = 30) -> int:
    """Variant id: ILS1 for the first cv1 stalled iterations, then ILS2..4 for cv2 each, cycling."""
    g = i - lst_impr
    if g <= cv1:
        return 1
    return (2, 3, 4)[((g - cv1 - 1) // cv2) % 3]


# -- elite set ---------------------------------------------------------------

def solution_arcs(sol: Solution) -> frozenset:
    arcs = set()
    K = sol.inst.K
    for r in sol.routes:
        v = r.visits
        if not any(x > K for x in v):
            continue
        arcs.update(zip(v, v[1:]))
    return frozenset(arcs)


def arc_distance(a: frozenset, b: frozenset) -> float:
    """Symmetric broken-pairs distance: share of arcs owned by only one of the two sets."""
    total = len(a) + len(b)
    if total == 0:
        return 0.0
    return len(a ^ b) / total


def solution_distance(a: Solution, b: Solution) -> float:
    return arc_distance(solution_arcs(a), solution_arcs(b))


def _min_ranks(values, reverse=False) -> list[int]:
    """Rank 0 = best; equal values share the smallest rank."""
    if reverse:
        return [sum(1 for w in values if w > v) for v in values]
    return [sum(1 for w in values if w < v) for v in values]


def biased_scores(fitness, dist, n_close_frac: float = 0.2):
    """(scores, diversity contributions) for members described by fitness and a distance matrix."""
    n = len(fitness)
    if n == 0:
        return [], []
    n_close = max(1, math.ceil(n_close_frac * n))
    div = []
    for i in range(n):
        others = sorted(dist[i][j] for j in range(n) if j != i)
        div.append(sum(others[:n_close]) / len(others[:n_close]) if others else 0.0)
    fr = _min_ranks(fitness)
    dr = _min_ranks(div, reverse=True)
    return [f + d for f, d in zip(fr, dr)], div


def retained_indices(fitness, dist, n_pop: int, n_close_frac: float = 0.2) -> list[int]:
    """Indices kept after ranking; the best-fitness member is always kept."""
    n = len(fitness)
    if n <= n_pop:
        return list(range(n))
    scores, _ = biased_scores(fitness, dist, n_close_frac)
    order = sorted(range(n), key=lambda i: (scores[i], fitness[i], i))
    keep = order[:n_pop]
    best = min(range(n), key=lambda i: (fitness[i], i))
    if best not in keep:
        keep[-1] = best
    return sorted(keep)


class EliteSet:
    """Bounded pool ranked by fitness rank plus diversity rank."""

    def __init__(self, n_pop: int = 10, n_close_frac: float = 0.2):
        self.n_pop = n_pop
        self.n_close_frac = n_close_frac
        self.members: list[Solution] = []
        self._arcs: list[frozenset] = []
        self.discarded_duplicates = 0

    def __len__(self):
        return len(self.members)

    def _dist_matrix(self):
        n = len(self.members)
        d = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                d[i][j] = d[j][i] = arc_distance(self._arcs[i], self._arcs[j])
        return d

    def _push(self, sol: Solution) -> bool:
        arcs = solution_arcs(sol)
        if any(arc_distance(arcs, a) == 0.0 for a in self._arcs):
            self.discarded_duplicates += 1
            return False
        self.members.append(sol.copy())
        self._arcs.append(arcs)
        return True

    def _trim(self):
        keep = retained_indices([m.fitness for m in self.members], self._dist_matrix(),
                                self.n_pop, self.n_close_frac)
        self.members = [self.members[i] for i in keep]
        self._arcs = [self._arcs[i] for i in keep]

    def initialize(self, solutions) -> None:
        for s in solutions:
            self._push(s)
        self._trim()

    def add(self, sol: Solution) -> bool:
        """Insert ``sol`` unless it duplicates a member; returns True if it survives the update."""
        if not self._push(sol):
            return False
        new = self.members[-1]
        self._trim()
        return any(m is new for m in self.members)

    def scores(self) -> list[int]:
        return biased_scores([m.fitness for m in self.members], self._dist_matrix(),
                             self.n_close_frac)[0]

    def tournament(self, rng, record: list | None = None) -> Solution:
        """Binary tournament on biased score (ties: fitness, then index)."""
        n = len(self.members)
        if n == 0:
            raise ValueError("empty elite set")
        scores = self.scores()
        i, j = rng.randrange(n), rng.randrange(n)
        key = lambda x: (scores[x], self.members[x].fitness, x)  # noqa: E731
        w = min(i, j, key=key)
        if record is not None:
            record.append((scores[i], scores[j], scores[w]))
        return self.members[w]

    def top(self) -> Solution:
        return min(self.members, key=lambda m: m.fitness)

    def min_pairwise_distance(self) -> float:
        d = self._dist_matrix()
        n = len(d)
        return min((d[i][j] for i in range(n) for j in range(i + 1, n)), default=1.0)


# -- IRRP, intensification, perturbations, ILS -------------------------------

def irrp(start: Solution, mode: str, criterion: str, params: Params, rng,
         iterations: int | None = None) -> Solution:
    """Iterative removal/repair.  ``mode`` is "constructive" or "intensify"."""
    inst = start.inst
    N = inst.N
    if mode == "constructive":
        iters = 2 * N + inst.K if iterations is None else iterations
        operators = (1, 2, 3)
    elif mode == "intensify":
        iters = (params.irrp_intensify_iters or N) if iterations is None else iterations
        operators = (1,)
    else:
        raise ValueError(f"unknown IRRP mode {mode!r}")
    best = start.copy()
    inc = best
    d_max = params.d0 if mode == "constructive" else params.d_max_intensify
    for _ in range(iters):
        cap = max(1, min(d_max, N))
        tmp = removal_repair_perturbation(inc.copy(), cap, criterion, rng, operators,
                                          sequence_length(cap, params.d0), params.depot_scope)
        if mode == "constructive":
            inc = tmp
            if inc.fitness < best.fitness - IMPROVE_EPS:
                best = inc
                d_max = params.d0
            else:
                d_max += 1
        elif tmp.fitness < inc.fitness - IMPROVE_EPS:
            inc = best = tmp
    return best


LS_SEQUENCE = (
    ("shift1", so.shift1),
    ("exchange1", so.exchange1),
    ("2opt*", so.two_opt_star),
    ("2opt", so.two_opt),
    ("r-opt", so.r_opt),
    ("swap-relocate", so.swap_relocate),
    ("swap-sequence", so.swap_sequence),
)


def intensification(sol: Solution, ctx: so.SearchContext, params: Params, rng,
                    use_irrp: bool = True) -> Solution:
    """Run IRRP and the local-search operators in turn until none improves.  Returns a new solution."""
    cur = sol.copy()
    while True:
        improved = False
        if use_irrp:
            nxt = irrp(cur, "intensify", "duration", params, rng)
            if nxt.fitness < cur.fitness - IMPROVE_EPS:
                cur = nxt
                improved = True
        for _, op in LS_SEQUENCE:
            if op(cur, ctx):
                improved = True
        if not improved:
            return cur


def ls_perturbation(sol: Solution, degree: int, ctx: so.SearchContext, rng,
                    criterion: str = "duration", trace: list | None = None) -> Solution:
    """Apply ``degree`` random non-improving swap-sequence moves, most-moved tasks first."""
    cur = sol.copy()
    if degree <= 0:
        return cur
    counters = ctx.counters
    order = sorted(range(cur.inst.N), key=lambda t: (-counters[t], t))
    done = 0
    idle = 0  # consecutive tasks without any available move
    idx = 0
    while done < degree and idle < len(order):
        t = order[idx % len(order)]
        idx += 1
        if cur.where[t] < 0:
            idle += 1
            continue
        moves = list(so.swap_sequence_moves(cur, ctx, so.SWAP_SEQUENCE_PAIRS, lo=0.0, hi=so.INF,
                                            pruned=False, start_task=t, criterion=criterion))
        if not moves:
            idle += 1
            continue
        mv = moves[int(rng.random() * len(moves))]
        mv.apply()
        done += 1
        idle = 0
        if trace is not None:
            trace.append(cur.copy())
    return cur


def ils(start: Solution, variant: IlsVariant, params: Params, ctx: so.SearchContext, rng,
        deadline: float | None = None) -> Solution:
    """Iterated local search chain; returns the best solution met."""
    N = start.inst.N
    limit = params.ils_no_improve or N
    if params.reset_counters:
        ctx.counters[:] = [0] * N
    cur = intensification(start, ctx, params, rng)
    best = cur
    d_max = params.d0
    stall = 0
    while stall < limit:
        if deadline is not None and time.perf_counter() > deadline:
            break
        cap = max(1, min(d_max, N))
        if variant.perturbation == "remove-repair":
            cur = removal_repair_perturbation(cur.copy(), cap, variant.criterion, rng,
                                              seq_length=sequence_length(cap, params.d0),
                                              depot_scope=params.depot_scope)
        else:
            cur = ls_perturbation(cur, cap, ctx, rng, variant.criterion)
        cur = intensification(cur, ctx, params, rng)
        if cur.fitness < best.fitness - IMPROVE_EPS:
            best = cur
            d_max = params.d0
            stall = 0
        else:
            d_max += 1
            stall += 1
    return best


@dataclass
class EilsTrace:
    best_fitness: list = field(default_factory=list)  # global best after each iteration
    variants: list = field(default_factory=list)
    elite_sizes: list = field(default_factory=list)
    elite_min_distance: list = field(default_factory=list)
    tournaments: list = field(default_factory=list)  # (score_a, score_b, score_winner)
    ils_fitness: list = field(default_factory=list)
    audit: object = None  # optional callable(solution) run on every elite candidate


@dataclass
class EilsResult:
    best: Solution
    iterations: int
    elite: EliteSet
    trace: EilsTrace | None = None


def eils(inst: Instance, params: Params | None = None, trace: EilsTrace | None = None) -> EilsResult:
    params = (params or Params()).validate()
    rng = random.Random(params.seed)
    deadline = None if params.time_limit is None else time.perf_counter() + params.time_limit
    ctx = so.SearchContext(inst, chi=params.chi)
    N = inst.N

    initial = []
    for _ in range(params.n_initial or inst.K):
        empty = Solution(inst, penalty=params.penalty)
        initial.append(irrp(empty, "constructive", "duration", params, rng))
    if trace is not None and trace.audit is not None:
        for s in initial:
            trace.audit(s)
    elite = EliteSet(params.n_pop, params.n_close_frac)
    elite.initialize(initial)
    best = elite.top()
    lst_impr = 0
    done = 0
    for i in range(1, params.n_ils + 1):
        if deadline is not None and time.perf_counter() > deadline:
            break
        rec = trace.tournaments if trace is not None else None
        s = elite.tournament(rng, rec)
        variant = ILS_VARIANTS[select_ils(i, lst_impr, params.cv1, params.cv2)]
        s = removal_repair_perturbation(s.copy(), max(1, N // 2), variant.criterion, rng,
                                        seq_length=sequence_length(max(1, N // 2), params.d0),
                                        depot_scope=params.depot_scope)
        s_ils = ils(s, variant, params, ctx, rng, deadline)
        if trace is not None and trace.audit is not None:
            trace.audit(s_ils)
        elite.add(s_ils)
        if s_ils.fitness < best.fitness - IMPROVE_EPS:
            best = s_ils
            lst_impr = i
        done = i
        if trace is not None:
            trace.best_fitness.append(best.fitness)
            trace.variants.append(variant.id)
            trace.elite_sizes.append(len(elite))
            trace.elite_min_distance.append(elite.min_pairwise_distance())
            trace.ils_fitness.append(s_ils.fitness)
    return EilsResult(elite.top(), done, elite, trace)

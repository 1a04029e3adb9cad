"""Immutable TRSP problem data.

Node layout: 0 is the central depot, 1..K are the technicians' home depots
and K+1..K+N are task locations (task ``i`` sits at node ``K+1+i``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

# Per-type resource vectors are packed into one Python int so that segment
# concatenation and feasibility checks are a handful of integer ops.
FIELD_BITS = 24
STRIDE = FIELD_BITS + 1  # one guard bit per field
FIELD_MASK = (1 << FIELD_BITS) - 1
GUARD = 1 << FIELD_BITS


def pack(values: Sequence[int]) -> int:
    out = 0
    for f, v in enumerate(values):
        v = int(v)
        if v < 0 or v > FIELD_MASK:
            raise ValueError(f"packed field out of range: {v}")
        out |= v << (STRIDE * f)
    return out


def unpack(x: int, n: int) -> tuple[int, ...]:
    return tuple((x >> (STRIDE * f)) & FIELD_MASK for f in range(n))


@dataclass(frozen=True)
class Task:
    id: int
    location: int
    service_time: float
    tw_open: float
    tw_close: float
    part_demand: tuple[int, ...]
    tool_need: tuple[bool, ...]
    skill_need: tuple[bool, ...]


@dataclass(frozen=True)
class Technician:
    id: int
    home_depot: int
    part_inventory: tuple[int, ...]
    tool_onboard: tuple[bool, ...]
    skill_has: tuple[bool, ...]
    depot_tw: tuple[float, float]


class DomainError(ValueError):
    pass


def euclidean_travel(coords, rounding: str = "none") -> list[list[float]]:
    n = len(coords)
    travel = [[0.0] * n for _ in range(n)]
    for i in range(n):
        xi, yi = coords[i]
        for j in range(n):
            if i == j:
                continue
            xj, yj = coords[j]
            d = math.hypot(xi - xj, yi - yj)
            if rounding == "one-decimal-truncation":
                d = math.floor(d * 10.0) / 10.0
            elif rounding != "none":
                raise ValueError(f"unknown rounding mode {rounding!r}")
            travel[i][j] = d
    return travel


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    n_tools: int
    n_parts: int
    n_skills: int
    coords: tuple[tuple[float, float], ...]
    tasks: tuple[Task, ...]
    technicians: tuple[Technician, ...]
    delta0: float = 0.0
    rounding: str = "none"
    travel: tuple[tuple[float, ...], ...] | None = None
    # derived, filled in __post_init__
    compat: tuple[frozenset, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.travel is None:
            t = euclidean_travel(self.coords, self.rounding)
            object.__setattr__(self, "travel", tuple(tuple(r) for r in t))
        K, N = len(self.technicians), len(self.tasks)
        compat = []
        for task in self.tasks:
            compat.append(frozenset(
                tech.id for tech in self.technicians
                if all(h or not need for need, h in zip(task.skill_need, tech.skill_has))
            ))
        object.__setattr__(self, "compat", tuple(compat))

        # flat per-node arrays used by the evaluation kernel
        n_nodes = 1 + K + N
        service = [0.0] * n_nodes
        tw_e = [0.0] * n_nodes
        tw_l = [0.0] * n_nodes
        tools = [0] * n_nodes
        parts = [0] * n_nodes
        skills = [0] * n_nodes
        service[0] = float(self.delta0)
        if K:
            tw_e[0] = min(t.depot_tw[0] for t in self.technicians)
            tw_l[0] = max(t.depot_tw[1] for t in self.technicians)
        else:
            tw_e[0], tw_l[0] = 0.0, math.inf
        for tech in self.technicians:
            v = tech.home_depot
            tw_e[v], tw_l[v] = tech.depot_tw
        for task in self.tasks:
            v = task.location
            service[v] = task.service_time
            tw_e[v], tw_l[v] = task.tw_open, task.tw_close
            tools[v] = pack([int(b) for b in task.tool_need])
            parts[v] = pack(task.part_demand)
            skills[v] = pack([int(b) for b in task.skill_need])
        object.__setattr__(self, "node_service", tuple(service))
        object.__setattr__(self, "node_e", tuple(tw_e))
        object.__setattr__(self, "node_l", tuple(tw_l))
        object.__setattr__(self, "node_tools", tuple(tools))
        object.__setattr__(self, "node_parts", tuple(parts))
        object.__setattr__(self, "node_skills", tuple(skills))

        # per-technician masks for O(1) resource checks
        parts_guard = sum(GUARD << (STRIDE * p) for p in range(self.n_parts))
        caps, tool_miss, skill_miss = [], [], []
        for tech in self.technicians:
            caps.append(pack(tech.part_inventory) + parts_guard)
            tool_miss.append(sum(FIELD_MASK << (STRIDE * t)
                                 for t, has in enumerate(tech.tool_onboard) if not has))
            skill_miss.append(sum(FIELD_MASK << (STRIDE * q)
                                  for q, has in enumerate(tech.skill_has) if not has))
        object.__setattr__(self, "parts_guard", parts_guard)
        object.__setattr__(self, "tech_parts_cap", tuple(caps))
        object.__setattr__(self, "tech_tool_missing", tuple(tool_miss))
        object.__setattr__(self, "tech_skill_missing", tuple(skill_miss))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.name, self.n_tools, self.n_parts, self.n_skills, self.coords,
                self.tasks, self.technicians, self.delta0, self.rounding, self.travel) == \
               (other.name, other.n_tools, other.n_parts, other.n_skills, other.coords,
                other.tasks, other.technicians, other.delta0, other.rounding, other.travel)

    __hash__ = object.__hash__

    @property
    def K(self) -> int:
        return len(self.technicians)

    @property
    def N(self) -> int:
        return len(self.tasks)

    @property
    def n_nodes(self) -> int:
        return 1 + self.K + self.N

    def task_node(self, i: int) -> int:
        return self.K + 1 + i

    def node_task(self, v: int) -> int:
        """Task id for a node, or -1 for the central depot and home depots."""
        return v - self.K - 1 if v > self.K else -1

    def home(self, k: int) -> int:
        return self.technicians[k].home_depot

    def node_kind(self, v: int) -> str:
        if v == 0:
            return "central"
        if 1 <= v <= self.K:
            return "home"
        if self.K < v < self.n_nodes:
            return "task"
        raise DomainError(f"node {v} out of range")


def compatible_technicians(instance: Instance, task: int) -> frozenset:
    if not 0 <= task < instance.N:
        raise DomainError(f"task {task} out of range 0..{instance.N - 1}")
    return instance.compat[task]


def validate_instance(instance: Instance) -> list[str]:
    """Return human-readable violations of the data invariants (empty if none)."""
    out = []
    K = instance.K
    for i, task in enumerate(instance.tasks):
        if task.id != i:
            out.append(f"tasks[{i}].id={task.id} (expected {i})")
        if task.location != K + 1 + i:
            out.append(f"tasks[{i}].location={task.location} (expected {K + 1 + i})")
        if task.tw_open > task.tw_close:
            out.append(f"tasks[{i}].tw_open > tw_close ({task.tw_open} > {task.tw_close})")
        if task.service_time < 0:
            out.append(f"tasks[{i}].service_time < 0")
        if any(d < 0 for d in task.part_demand):
            out.append(f"tasks[{i}].part_demand has a negative entry")
        if len(task.part_demand) != instance.n_parts:
            out.append(f"tasks[{i}].part_demand length {len(task.part_demand)}")
        if len(task.tool_need) != instance.n_tools:
            out.append(f"tasks[{i}].tool_need length {len(task.tool_need)}")
        if len(task.skill_need) != instance.n_skills:
            out.append(f"tasks[{i}].skill_need length {len(task.skill_need)}")
    for k, tech in enumerate(instance.technicians):
        if tech.id != k:
            out.append(f"technicians[{k}].id={tech.id} (expected {k})")
        if tech.home_depot != k + 1:
            out.append(f"technicians[{k}].home_depot={tech.home_depot} (expected {k + 1})")
        if tech.depot_tw[0] > tech.depot_tw[1]:
            out.append(f"technicians[{k}].depot_tw open > close")
        if any(v < 0 for v in tech.part_inventory):
            out.append(f"technicians[{k}].part_inventory has a negative entry")
        if len(tech.part_inventory) != instance.n_parts:
            out.append(f"technicians[{k}].part_inventory length {len(tech.part_inventory)}")
        if len(tech.tool_onboard) != instance.n_tools:
            out.append(f"technicians[{k}].tool_onboard length {len(tech.tool_onboard)}")
        if len(tech.skill_has) != instance.n_skills:
            out.append(f"technicians[{k}].skill_has length {len(tech.skill_has)}")
    if instance.delta0 < 0:
        out.append("delta0 < 0")
    n = instance.n_nodes
    if len(instance.coords) != n:
        out.append(f"coords has {len(instance.coords)} entries (expected {n})")
    travel = instance.travel
    if len(travel) != n or any(len(row) != n for row in travel):
        out.append(f"travel is not {n}x{n}")
    else:
        for i in range(n):
            if travel[i][i] != 0:
                out.append(f"travel[{i}][{i}]={travel[i][i]} (expected 0)")
            for j in range(n):
                if travel[i][j] < 0:
                    out.append(f"travel[{i}][{j}]={travel[i][j]} is negative")
    return out

"""Solomon parsing, TRSP instance generation and plain-text file formats.

TRSP instance file (version 1)::

    TRSP 1
    [META]
    <name> <K> <N> <|T|> <|P|> <|Q|> <delta0> <rounding>
    [NODES]
    <id> <x> <y>                                   # 1+K+N lines
    [TASKS]
    <id> <node> <service> <e> <l> <parts..> <tools..> <skills..>
    [TECHS]
    <id> <depot> <e> <l> <inventory..> <tools..> <skills..>
    [TRAVEL]                                       # optional explicit matrix
    <t_i0> <t_i1> ...
    [END]

Decimals are written with ``repr`` so every value round-trips exactly and a
rewrite of a loaded file is byte-identical.  Booleans are ``0``/``1``.

Solution file: one ``<tech>: <visit> ...`` line per technician where a visit
is a task id or ``D`` for the central depot, then ``unscheduled: <ids>``,
``duration: <value>`` and ``fitness: <value>``.
"""

from __future__ import annotations

import io
import os
import random
from dataclasses import dataclass, field

from .model import Instance, Task, Technician, euclidean_travel
from .route_eval import Route, Solution

FORMAT_VERSION = 1


class ParseError(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolomonCustomer:
    id: int
    x: float
    y: float
    demand: float
    ready: float
    due: float
    service: float


@dataclass(frozen=True)
class SolomonBase:
    name: str
    depot: SolomonCustomer
    customers: tuple[SolomonCustomer, ...]
    n_vehicles: int = 0
    capacity: float = 0.0

    @property
    def horizon(self) -> tuple[float, float]:
        return self.depot.ready, self.depot.due


def _open_text(src):
    if hasattr(src, "read"):
        return src.read()
    if isinstance(src, (str, os.PathLike)) and os.path.exists(src):
        with open(src) as fh:
            return fh.read()
    return str(src)


def parse_solomon(text) -> SolomonBase:
    """Parse the classic Solomon VRPTW layout (name, VEHICLE, CUSTOMER table)."""
    if hasattr(text, "read"):
        text = text.read()
    lines = text.splitlines()
    name = None
    n_vehicles, capacity = 0, 0.0
    rows = []
    section = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if name is None:
            name = line.split()[0]
            continue
        if upper.startswith("VEHICLE"):
            section = "vehicle"
            continue
        if upper.startswith("CUSTOMER"):
            section = "customer"
            continue
        if any(c.isalpha() for c in line):
            continue  # column headers
        cols = line.split()
        if section == "vehicle":
            if len(cols) != 2:
                raise ParseError(f"line {lineno}: expected 'NUMBER CAPACITY', got {line!r}")
            n_vehicles, capacity = int(float(cols[0])), float(cols[1])
        elif section == "customer":
            if len(cols) != 7:
                raise ParseError(f"line {lineno}: expected 7 columns, got {len(cols)}")
            try:
                vals = [float(c) for c in cols]
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
            rows.append(SolomonCustomer(int(vals[0]), *vals[1:]))
        else:
            raise ParseError(f"line {lineno}: data outside a section")
    if name is None or not rows:
        raise ParseError("no customer table found")
    return SolomonBase(name, rows[0], tuple(rows[1:]), n_vehicles, capacity)


def format_solomon(base: SolomonBase) -> str:
    out = [base.name, "", "VEHICLE", "NUMBER     CAPACITY",
           f"  {base.n_vehicles}         {base.capacity:g}", "", "CUSTOMER",
           "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME", ""]
    for c in (base.depot, *base.customers):
        out.append(f"{c.id:5d} {c.x:10g} {c.y:10g} {c.demand:10g} {c.ready:10g} "
                   f"{c.due:10g} {c.service:10g}")
    return "\n".join(out) + "\n"


def synthetic_solomon(n_customers: int, seed: int, *, size: float = 100.0,
                      horizon: float = 1000.0, tw_width: tuple = (30.0, 200.0),
                      service: tuple = (5.0, 20.0), name: str | None = None) -> SolomonBase:
    """Random Solomon-style base (uniform coordinates, windows around a direct visit)."""
    rng = random.Random(seed)
    cx = cy = round(size / 2, 2)
    depot = SolomonCustomer(0, cx, cy, 0.0, 0.0, horizon, 0.0)
    customers = []
    for i in range(1, n_customers + 1):
        x, y = round(rng.random() * size, 2), round(rng.random() * size, 2)
        svc = round(service[0] + rng.random() * (service[1] - service[0]), 2)
        width = tw_width[0] + rng.random() * (tw_width[1] - tw_width[0])
        reach = ((x - cx) ** 2 + (y - cy) ** 2) ** 0.5
        lo, hi = reach, horizon - reach - svc - width
        ready = round(lo + rng.random() * max(hi - lo, 0.0), 2)
        due = round(min(ready + width, horizon - reach - svc), 2)
        due = max(due, ready)
        customers.append(SolomonCustomer(i, x, y, 10.0, ready, due, svc))
    return SolomonBase(name or f"SYN{n_customers}_{seed}", depot, tuple(customers), 25, 200.0)


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    n_depots: int = 25
    n_skills: int = 5
    n_tools: int = 3
    n_parts: int = 3
    skill_density: float = 0.3      # P(task needs skill q)
    tech_skill_density: float = 0.6  # P(technician has skill q)
    tool_density: float = 0.3       # P(task needs tool t) and P(technician carries tool t)
    part_density: float = 0.3       # P(task needs part type p at all)
    max_part_demand: int = 3
    distance_rounding: str = "none"
    delta0: float | None = None     # None: the Solomon depot's service time
    depot_coords: tuple = field(default=())  # fixed home-depot coordinates, optional

    def validate(self) -> None:
        for name in ("n_depots", "n_skills", "n_tools", "n_parts", "max_part_demand"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("skill_density", "tech_skill_density", "tool_density", "part_density"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.distance_rounding not in ("none", "one-decimal-truncation"):
            raise ConfigError(f"unknown distance_rounding {self.distance_rounding!r}")
        if self.depot_coords and len(self.depot_coords) != self.n_depots:
            raise ConfigError("depot_coords must list one coordinate pair per depot")
        if self.skill_density > 0 and self.tech_skill_density == 0:
            raise ConfigError("tasks need skills but no technician can hold any")


def derive_trsp(base: SolomonBase, cfg: GeneratorConfig) -> Instance:
    """Deterministically extend a Solomon base into a TRSP instance."""
    cfg.validate()
    rng = random.Random(cfg.seed)
    K = cfg.n_depots
    xs = [c.x for c in base.customers] or [base.depot.x]
    ys = [c.y for c in base.customers] or [base.depot.y]
    if cfg.depot_coords:
        homes = [(float(x), float(y)) for x, y in cfg.depot_coords]
    else:
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        homes = [(round(x0 + rng.random() * (x1 - x0), 2), round(y0 + rng.random() * (y1 - y0), 2))
                 for _ in range(K)]
    coords = [(base.depot.x, base.depot.y), *homes, *((c.x, c.y) for c in base.customers)]

    def draw(p):
        return rng.random() < p

    horizon = (base.depot.ready, base.depot.due)
    techs = []
    for k in range(K):
        skills = tuple(draw(cfg.tech_skill_density) for _ in range(cfg.n_skills))
        tools = tuple(draw(cfg.tool_density) for _ in range(cfg.n_tools))
        stock = tuple(int(rng.random() * (2 * cfg.max_part_demand + 1)) for _ in range(cfg.n_parts))
        techs.append(Technician(k, k + 1, stock, tools, skills, horizon))

    tasks = []
    for i, c in enumerate(base.customers):
        for _ in range(100):
            skills = tuple(draw(cfg.skill_density) for _ in range(cfg.n_skills))
            if any(all(h or not q for q, h in zip(skills, t.skill_has)) for t in techs):
                break
        else:
            # dense requirements: keep only what one randomly picked technician offers
            offered = techs[int(rng.random() * K)].skill_has
            skills = tuple(q and h for q, h in zip(skills, offered))
        tools = tuple(draw(cfg.tool_density) for _ in range(cfg.n_tools))
        parts = tuple(1 + int(rng.random() * cfg.max_part_demand) if draw(cfg.part_density) else 0
                      for _ in range(cfg.n_parts))
        tasks.append(Task(i, K + 1 + i, c.service, c.ready, c.due, parts, tools, skills))

    delta0 = base.depot.service if cfg.delta0 is None else cfg.delta0
    return Instance(base.name, cfg.n_tools, cfg.n_parts, cfg.n_skills, tuple(coords),
                    tuple(tasks), tuple(techs), float(delta0), cfg.distance_rounding)


def random_instance(n_tasks: int, n_techs: int, seed: int, **overrides) -> Instance:
    """Small synthetic instance: random Solomon-style base + generator."""
    base_kw = {k: overrides.pop(k) for k in ("size", "horizon", "tw_width", "service") if k in overrides}
    base = synthetic_solomon(n_tasks, seed, **base_kw)
    cfg = GeneratorConfig(seed=seed, n_depots=n_techs, **overrides)
    return derive_trsp(base, cfg)


# -- TRSP text format -------------------------------------------------------

def _f(x: float) -> str:
    return repr(float(x))


def _b(flags) -> list[str]:
    return ["1" if f else "0" for f in flags]


def format_trsp(inst: Instance) -> str:
    if any(c.isspace() for c in inst.name) or not inst.name:
        raise ValueError("instance name must be a non-empty token")
    out = [f"TRSP {FORMAT_VERSION}", "[META]",
           " ".join([inst.name, str(inst.K), str(inst.N), str(inst.n_tools), str(inst.n_parts),
                     str(inst.n_skills), _f(inst.delta0), inst.rounding]),
           "[NODES]"]
    for v, (x, y) in enumerate(inst.coords):
        out.append(f"{v} {_f(x)} {_f(y)}")
    out.append("[TASKS]")
    for t in inst.tasks:
        out.append(" ".join([str(t.id), str(t.location), _f(t.service_time), _f(t.tw_open),
                             _f(t.tw_close), *map(str, t.part_demand), *_b(t.tool_need),
                             *_b(t.skill_need)]))
    out.append("[TECHS]")
    for k in inst.technicians:
        out.append(" ".join([str(k.id), str(k.home_depot), _f(k.depot_tw[0]), _f(k.depot_tw[1]),
                             *map(str, k.part_inventory), *_b(k.tool_onboard), *_b(k.skill_has)]))
    derived = euclidean_travel(inst.coords, inst.rounding)
    if any(tuple(a) != tuple(b) for a, b in zip(derived, inst.travel)):
        out.append("[TRAVEL]")
        for row in inst.travel:
            out.append(" ".join(_f(x) for x in row))
    out.append("[END]")
    return "\n".join(out) + "\n"


def write_trsp(inst: Instance, file) -> None:
    text = format_trsp(inst)
    if hasattr(file, "write"):
        file.write(text)
    else:
        with open(file, "w") as fh:
            fh.write(text)


def _sections(text: str) -> dict:
    lines = text.splitlines()
    if not lines or lines[0].split()[:1] != ["TRSP"]:
        raise ParseError("missing 'TRSP <version>' header")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ParseError("malformed version header") from None
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported TRSP format version {version} (expected {FORMAT_VERSION})")
    secs: dict = {}
    cur = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            cur = line[1:-1]
            if cur in secs:
                raise ParseError(f"line {lineno}: duplicate section [{cur}]")
            secs[cur] = []
            continue
        if cur is None:
            raise ParseError(f"line {lineno}: data before first section")
        secs[cur].append((lineno, line.split()))
    for req in ("META", "NODES", "TASKS", "TECHS", "END"):
        if req not in secs:
            raise ParseError(f"missing section [{req}]")
    return secs


def _flags(tokens, lineno) -> tuple[bool, ...]:
    out = []
    for tok in tokens:
        if tok not in ("0", "1"):
            raise ParseError(f"line {lineno}: expected 0/1 flag, got {tok!r}")
        out.append(tok == "1")
    return tuple(out)


def parse_trsp(text: str) -> Instance:
    secs = _sections(text)
    if len(secs["META"]) != 1 or len(secs["META"][0][1]) != 8:
        raise ParseError("[META] must hold one line with 8 fields")
    lineno, meta = secs["META"][0]
    try:
        name = meta[0]
        K, N, nT, nP, nQ = (int(x) for x in meta[1:6])
        delta0 = float(meta[6])
    except ValueError:
        raise ParseError(f"line {lineno}: malformed [META]") from None
    rounding = meta[7]
    try:
        if len(secs["NODES"]) != 1 + K + N:
            raise ParseError(f"[NODES] has {len(secs['NODES'])} lines, expected {1 + K + N}")
        coords = []
        for v, (ln, cols) in enumerate(secs["NODES"]):
            if len(cols) != 3 or int(cols[0]) != v:
                raise ParseError(f"line {ln}: malformed node line")
            coords.append((float(cols[1]), float(cols[2])))
        if len(secs["TASKS"]) != N:
            raise ParseError(f"[TASKS] has {len(secs['TASKS'])} lines, expected {N}")
        tasks = []
        for ln, cols in secs["TASKS"]:
            if len(cols) != 5 + nP + nT + nQ:
                raise ParseError(f"line {ln}: task line has {len(cols)} fields")
            parts = tuple(int(x) for x in cols[5:5 + nP])
            tools = _flags(cols[5 + nP:5 + nP + nT], ln)
            skills = _flags(cols[5 + nP + nT:], ln)
            tasks.append(Task(int(cols[0]), int(cols[1]), float(cols[2]), float(cols[3]),
                              float(cols[4]), parts, tools, skills))
        if len(secs["TECHS"]) != K:
            raise ParseError(f"[TECHS] has {len(secs['TECHS'])} lines, expected {K}")
        techs = []
        for ln, cols in secs["TECHS"]:
            if len(cols) != 4 + nP + nT + nQ:
                raise ParseError(f"line {ln}: technician line has {len(cols)} fields")
            inv = tuple(int(x) for x in cols[4:4 + nP])
            tools = _flags(cols[4 + nP:4 + nP + nT], ln)
            skills = _flags(cols[4 + nP + nT:], ln)
            techs.append(Technician(int(cols[0]), int(cols[1]), inv, tools, skills,
                                    (float(cols[2]), float(cols[3]))))
        travel = None
        if "TRAVEL" in secs:
            rows = secs["TRAVEL"]
            n = 1 + K + N
            if len(rows) != n or any(len(c) != n for _, c in rows):
                raise ParseError(f"[TRAVEL] must be a {n}x{n} matrix")
            travel = tuple(tuple(float(x) for x in c) for _, c in rows)
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from None
    if rounding not in ("none", "one-decimal-truncation"):
        raise ParseError(f"unknown rounding {rounding!r}")
    return Instance(name, nT, nP, nQ, tuple(coords), tuple(tasks), tuple(techs), delta0,
                    rounding, travel)


def load_trsp(file) -> Instance:
    return parse_trsp(_open_text(file))


# -- solution format --------------------------------------------------------

def format_solution(sol: Solution) -> str:
    inst = sol.inst
    out = []
    for r in sol.routes:
        toks = ["D" if v == 0 else str(inst.node_task(v)) for v in r.visits[1:-1]]
        out.append(f"{r.k}:" + ("" if not toks else " " + " ".join(toks)))
    un = sorted(sol.unscheduled)
    out.append("unscheduled:" + ("" if not un else " " + " ".join(map(str, un))))
    out.append(f"duration: {_f(sol.duration_total)}")
    out.append(f"fitness: {_f(sol.fitness)}")
    return "\n".join(out) + "\n"


def write_solution(sol: Solution, file) -> None:
    text = format_solution(sol)
    if hasattr(file, "write"):
        file.write(text)
    else:
        with open(file, "w") as fh:
            fh.write(text)


@dataclass
class SolutionRecord:
    visits: list          # node lists per technician, home depots included
    unscheduled: set
    duration: float | None = None
    fitness: float | None = None


def parse_solution(text: str, inst: Instance) -> SolutionRecord:
    """Syntactic parse; raises ParseError on unknown or repeated tasks."""
    routes: dict = {}
    unscheduled = None
    duration = fitness = None
    seen = set()

    def task_node(tok, lineno):
        if tok == "D":
            return 0
        try:
            t = int(tok)
        except ValueError:
            raise ParseError(f"line {lineno}: bad visit {tok!r}") from None
        if not 0 <= t < inst.N:
            raise ParseError(f"line {lineno}: unknown task {t}")
        if t in seen:
            raise ParseError(f"line {lineno}: task {t} appears twice")
        seen.add(t)
        return inst.task_node(t)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"line {lineno}: missing ':'")
        toks = rest.split()
        if head == "unscheduled":
            unscheduled = set()
            for tok in toks:
                if task_node(tok, lineno) == 0:
                    raise ParseError(f"line {lineno}: depot listed as unscheduled")
                unscheduled.add(int(tok))
        elif head == "duration":
            duration = float(rest)
        elif head == "fitness":
            fitness = float(rest)
        else:
            try:
                k = int(head)
            except ValueError:
                raise ParseError(f"line {lineno}: unknown record {head!r}") from None
            if not 0 <= k < inst.K or k in routes:
                raise ParseError(f"line {lineno}: bad or repeated technician {k}")
            home = inst.home(k)
            routes[k] = [home, *(task_node(t, lineno) for t in toks), home]
    if len(routes) != inst.K:
        raise ParseError(f"expected {inst.K} route lines, found {len(routes)}")
    if unscheduled is None:
        raise ParseError("missing 'unscheduled:' line")
    missing = set(range(inst.N)) - seen
    if missing:
        raise ParseError(f"tasks neither routed nor unscheduled: {sorted(missing)}")
    return SolutionRecord([routes[k] for k in range(inst.K)], unscheduled, duration, fitness)


def load_solution(file, inst: Instance) -> Solution:
    rec = parse_solution(_open_text(file), inst)
    sol = Solution(inst, [Route(inst, k, v) for k, v in enumerate(rec.visits)], rec.unscheduled)
    problems = sol.check()
    if problems:
        raise ParseError("infeasible solution: " + "; ".join(problems))
    return sol


def dumps(obj) -> str:
    buf = io.StringIO()
    if isinstance(obj, Instance):
        write_trsp(obj, buf)
    else:
        write_solution(obj, buf)
    return buf.getvalue()

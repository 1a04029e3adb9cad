import os
import random

import pytest
from hypothesis import HealthCheck, settings

from trsp.construct import best_insertion
from trsp.instance_io import random_instance
from trsp.route_eval import Solution

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def make_instance(n=10, k=3, seed=0, **kw):
    return random_instance(n, k, seed, **kw)


def greedy_solution(inst, criterion="duration"):
    sol = Solution(inst)
    best_insertion(sol, range(inst.N), criterion)
    return sol


def scrambled_solution(inst, seed):
    """A feasible solution built by inserting tasks in random order at random feasible spots."""
    rng = random.Random(seed)
    sol = Solution(inst)
    order = list(range(inst.N))
    rng.shuffle(order)
    from trsp.construct import route_insertions
    for t in order:
        moves = [mv for k in sorted(inst.compat[t]) for mv in route_insertions(sol, k, t, "duration")]
        if not moves:
            moves = [mv for k in sorted(inst.compat[t])
                     for mv in route_insertions(sol, k, t, "duration", with_depot=True)]
        if moves:
            mv = rng.choice(moves)
            sol.insert_task(t, mv.route, mv.position, mv.with_depot)
    return sol


@pytest.fixture
def small_instance():
    return make_instance(10, 3, 7)


@pytest.fixture
def greedy(small_instance):
    return greedy_solution(small_instance)


def build_instance(tasks, techs, central=(0.0, 0.0), n_tools=1, n_parts=1, n_skills=1,
                   delta0=0.0, name="hand", travel=None):
    """Hand-made instance.

    tasks: dicts with x, y, e, l, s and optional parts, tools, skills.
    techs: dicts with x, y and optional inv, tools, skills, tw.
    """
    from trsp.model import Instance, Task, Technician

    K = len(techs)
    coords = [central] + [(t["x"], t["y"]) for t in techs] + [(t["x"], t["y"]) for t in tasks]
    tech_objs = tuple(
        Technician(k, k + 1, tuple(t.get("inv", (0,) * n_parts)),
                   tuple(t.get("tools", (True,) * n_tools)),
                   tuple(t.get("skills", (True,) * n_skills)), tuple(t.get("tw", (0.0, 1000.0))))
        for k, t in enumerate(techs))
    task_objs = tuple(
        Task(i, K + 1 + i, float(t.get("s", 0.0)), float(t["e"]), float(t["l"]),
             tuple(t.get("parts", (0,) * n_parts)), tuple(t.get("tools", (False,) * n_tools)),
             tuple(t.get("skills", (False,) * n_skills)))
        for i, t in enumerate(tasks))
    return Instance(name, n_tools, n_parts, n_skills, tuple(coords), task_objs, tech_objs,
                    delta0, "none", travel)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

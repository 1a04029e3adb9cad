"""Technician routing and scheduling: enhanced iterated local search."""

from .model import Instance, Task, Technician, compatible_technicians, validate_instance
from .route_eval import EMPTY, Route, SegmentStats, Solution, concat, stats_single

__all__ = [
    "Instance", "Task", "Technician", "compatible_technicians", "validate_instance",
    "EMPTY", "Route", "SegmentStats", "Solution", "concat", "stats_single",
]

"""Rateless broadcast coding for users with heterogeneous demands and erasure rates."""

__version__ = "0.1.0"

from .baselines import baseline_report, lower_bound, timeshare_delivery, unicast_total
from .chunked import ChunkConfig, best_chunk_size, chunked_analysis, expected_delivery_chunked
from .degree_model import (DegreeDistribution, Scenario, User, lt_analysis, lt_delivery_time,
                           lt_recoverable_fraction, side_info_transform, systematic_delivery_time)
from .errors import CorruptStreamError, HetcastError, SolverError, UsageError
from .growth import best_scale, growth_delivery_time, growth_schedule
from .kernels import BACKEND
from .optimizer import optimize_scenario
from .sim import SchemeParams, average_runs, simulate

__all__ = [
    "BACKEND", "ChunkConfig", "CorruptStreamError", "DegreeDistribution", "HetcastError", "Scenario",
    "SchemeParams", "SolverError", "UsageError", "User", "average_runs", "baseline_report", "best_chunk_size",
    "best_scale", "chunked_analysis", "expected_delivery_chunked", "growth_delivery_time", "growth_schedule",
    "lower_bound", "lt_analysis", "lt_delivery_time", "lt_recoverable_fraction", "optimize_scenario",
    "side_info_transform", "simulate", "systematic_delivery_time", "timeshare_delivery", "unicast_total",
]

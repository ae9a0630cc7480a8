"""Fully dynamic approximate matching via damaged EDCS sparsifiers."""

from __future__ import annotations

from .edcs import DamagedEdcs, EdcsParams, static_build
from .errors import DynMatchError
from .graph import DynamicGraph, UpdateEvent, edge, parse_stream
from .matcher import LazyMatcher, static_approx_matching
from .oracle import check_damaged_edcs, max_matching_exact, mu
from .scheduler import BatchScheduler
from .uniform import UniformSparsifier, degree_split

__all__ = [
    "BatchScheduler",
    "DamagedEdcs",
    "DynMatchError",
    "DynamicGraph",
    "EdcsParams",
    "LazyMatcher",
    "UniformSparsifier",
    "UpdateEvent",
    "check_damaged_edcs",
    "degree_split",
    "edge",
    "max_matching_exact",
    "mu",
    "parse_stream",
    "static_approx_matching",
    "static_build",
]

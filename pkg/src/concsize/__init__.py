"""Concurrent sets with linearizable size, plus a checker and a benchmark driver."""

from .registry import ThreadRegistry, default_registry
from .sets import METHODS, STRUCTURES, make_set

__all__ = ["METHODS", "STRUCTURES", "ThreadRegistry", "default_registry", "make_set"]
__version__ = "0.1.0"

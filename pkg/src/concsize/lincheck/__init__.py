"""History recording, scripted schedules and linearizability checking."""

from .checker import SearchBudgetExceeded, Verdict, check_linearizable, naive_check
from .history import Event, History, HistoryFormatError, Operation
from .recorder import ConfigTooLarge, HarnessConfig, record
from .schedule import Deadlock, UnknownLabel, scripted_schedule

__all__ = [
    "ConfigTooLarge", "Deadlock", "Event", "HarnessConfig", "History", "HistoryFormatError",
    "Operation", "SearchBudgetExceeded", "UnknownLabel", "Verdict", "check_linearizable",
    "naive_check", "record", "scripted_schedule",
]

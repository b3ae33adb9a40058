"""Simulated robot execution: goal messages, events, tick state machine."""

from .events import (EVENT_KINDS, TERMINAL_KINDS, ExecutionEvent, FaultProfile,
                     GoalMessage)
from .runner import TICK_SECONDS, PlanExecutor, WorldHandle, execute

__all__ = [
    "EVENT_KINDS", "ExecutionEvent", "FaultProfile", "GoalMessage",
    "PlanExecutor", "TERMINAL_KINDS", "TICK_SECONDS", "WorldHandle", "execute",
]

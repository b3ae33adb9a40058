"""Session service, protocol, scenario replay, and CLI."""

from .protocol import (CLIENT_TYPES, PROTOCOL_VERSION, SERVER_TYPES, decode,
                       encode, error_message, make_message)
from .replay import ReplayReport, ScenarioRunner, replay
from .session import Session, SessionHandle

__all__ = [
    "CLIENT_TYPES", "PROTOCOL_VERSION", "ReplayReport", "SERVER_TYPES",
    "ScenarioRunner", "Session", "SessionHandle", "decode", "encode",
    "error_message", "make_message", "replay",
]

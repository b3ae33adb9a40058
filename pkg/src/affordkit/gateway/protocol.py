"""Session protocol: message envelopes and type vocabulary.

Every message is a JSON object {type, request_id, payload} sent as one text
frame over the socket. Client requests echo their request_id in exactly one
response; server-initiated pushes carry request_id null. The only sanctioned
drop is drag-sample coalescing: superseded samples get no response.
"""

from __future__ import annotations

import json
from typing import Any

PROTOCOL_VERSION = 1

CLIENT_TYPES = (
    "hello",
    "load_scene",
    "raycast",
    "lasso_select",
    "open_menu",
    "begin_drag",
    "drag_sample",
    "end_drag",
    "set_param",
    "request_resolutions",
    "choose_resolution",
    "confirm",
    "preempt",
    "human_action",
)

SERVER_TYPES = (
    "hello",
    "world_snapshot",
    "world_delta",
    "hit",
    "selection",
    "menu",
    "verdict",
    "offer",
    "preview_timeline",
    "execution_event",
    "ack",
    "error",
)


def make_message(msg_type: str, payload: dict | None = None,
                 request_id: str | int | None = None) -> dict:
    return {"type": msg_type, "request_id": request_id,
            "payload": payload or {}}


def encode(message: dict) -> str:
    return json.dumps(message, sort_keys=True, separators=(",", ":"))


def decode(text: str) -> dict:
    message = json.loads(text)
    if not isinstance(message, dict) or "type" not in message:
        raise ValueError("malformed protocol message")
    return message


def error_message(code: str, detail: str,
                  request_id: str | int | None = None) -> dict:
    return make_message("error", {"code": code, "detail": detail}, request_id)

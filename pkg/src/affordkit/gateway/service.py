"""Realtime gateway: WebSocket transport around sessions.

Each connection gets its own session (its own copy of the scene) unless the
service runs in shared mode, where every client joins one session and all
pushes broadcast. Drag samples are coalesced: when samples arrive faster than
evaluation, only the newest queued one is evaluated and answered.
"""

from __future__ import annotations

import asyncio
import json
import os
import time

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from ..errors import SceneLoadError
from ..executor.events import FaultProfile
from ..executor.runner import TICK_SECONDS
from ..feasibility.catalog import ExplanationCatalog
from ..world.loader import load_scene_file
from .protocol import PROTOCOL_VERSION, decode, encode, make_message
from .session import Session

LOG_DIR_ENV = "AFFORDKIT_LOG_DIR"


class ServeConfig:
    def __init__(self, scene_path: str, port: int = 8700,
                 fault_profile: FaultProfile | None = None,
                 catalog_path: str | None = None, shared: bool = False,
                 sim_speed: float | None = None, host: str = "127.0.0.1"):
        self.scene_path = scene_path
        self.port = port
        self.host = host
        self.fault_profile = fault_profile or FaultProfile()
        self.catalog_path = catalog_path
        self.shared = shared
        # None = run plans to completion inside the handler (tests, replays);
        # a number is a multiple of real time for watchable execution
        self.sim_speed = sim_speed


class SessionLog:
    def __init__(self, session_id: str):
        self.path = None
        log_dir = os.environ.get(LOG_DIR_ENV)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
            self.path = os.path.join(log_dir, f"session-{session_id}.jsonl")

    def record(self, direction: str, message: dict) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"dir": direction, "message": message},
                                sort_keys=True) + "\n")


def coalesce_drag_samples(inbox: asyncio.Queue, message: dict) -> dict:
    """Latest-wins for runs of queued drag samples.

    When the message at hand is a drag sample and more samples already sit in
    the inbox, skip ahead to the newest consecutive one; superseded samples
    are dropped without a response (the one sanctioned drop in the protocol).
    """
    while message.get("type") == "drag_sample" and not inbox.empty():
        head = inbox._queue[0]
        if head is not None and head.get("type") == "drag_sample":
            message = inbox.get_nowait()
        else:
            break
    return message


class Hub:
    """A session plus its subscribers."""

    def __init__(self, session: Session):
        self.session = session
        self.subscribers: dict[int, asyncio.Queue] = {}
        self.lock = asyncio.Lock()
        self.log = SessionLog(session.session_id)
        self._ids = 0

    def subscribe(self) -> tuple[int, asyncio.Queue]:
        self._ids += 1
        queue: asyncio.Queue = asyncio.Queue()
        self.subscribers[self._ids] = queue
        return self._ids, queue

    def unsubscribe(self, sub_id: int) -> None:
        self.subscribers.pop(sub_id, None)

    def push_all(self, message: dict) -> None:
        self.log.record("out", message)
        for queue in self.subscribers.values():
            queue.put_nowait(message)

    def push_one(self, sub_id: int, message: dict) -> None:
        self.log.record("out", message)
        queue = self.subscribers.get(sub_id)
        if queue is not None:
            queue.put_nowait(message)

    def route(self, sub_id: int, outputs: list[dict]) -> None:
        """Responses go to the requester, pushes to everyone."""
        for message in outputs:
            if message.get("request_id") is None:
                self.push_all(message)
            else:
                self.push_one(sub_id, message)


def create_app(config: ServeConfig) -> FastAPI:
    try:
        load_scene_file(config.scene_path)  # fail fast on a bad scene
    except Exception as exc:
        raise SceneLoadError(f"{config.scene_path}: {exc}") from None

    catalog = None
    if config.catalog_path:
        catalog = ExplanationCatalog.from_file(config.catalog_path)

    app = FastAPI(title="affordkit gateway")
    app.state.config = config
    app.state.shared_hub = None

    def new_session() -> Session:
        world = load_scene_file(config.scene_path)
        session = Session(world, fault_profile=config.fault_profile,
                          catalog=catalog)
        session.auto_drive = config.sim_speed is None
        return session

    if config.shared:
        app.state.shared_hub = Hub(new_session())

    @app.get("/healthz")
    def health() -> dict:
        return {"ok": True, "protocol_version": PROTOCOL_VERSION}

    @app.get("/protocol")
    def protocol_schema() -> dict:
        import importlib.resources as resources

        here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        # packaged copy first, repo copy as fallback for editable installs
        for candidate in (
            os.path.join(here, "data", "protocol.schema.json"),
        ):
            if os.path.exists(candidate):
                with open(candidate, "r", encoding="utf-8") as fh:
                    return json.load(fh)
        return {}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        hub = app.state.shared_hub or Hub(new_session())
        sub_id, queue = hub.subscribe()
        session = hub.session

        hello = make_message("hello", {
            "protocol_version": PROTOCOL_VERSION,
            "session_id": session.session_id,
            "shared": config.shared,
        })
        hub.push_one(sub_id, hello)
        hub.push_one(sub_id, session.snapshot_message())

        inbox: asyncio.Queue = asyncio.Queue()

        async def reader() -> None:
            try:
                while True:
                    text = await ws.receive_text()
                    try:
                        inbox.put_nowait(decode(text))
                    except (ValueError, json.JSONDecodeError):
                        hub.push_one(sub_id, make_message(
                            "error", {"code": "bad_frame",
                                      "detail": "unparseable frame"}))
            except WebSocketDisconnect:
                inbox.put_nowait(None)
            except Exception:
                inbox.put_nowait(None)

        async def writer() -> None:
            while True:
                message = await queue.get()
                if message is None:
                    return
                await ws.send_text(encode(message))

        async def ticker() -> None:
            if config.sim_speed is None:
                return
            period = TICK_SECONDS / config.sim_speed
            while True:
                await asyncio.sleep(period)
                async with hub.lock:
                    outputs = session.tick_once()
                hub.route(sub_id, outputs)

        reader_task = asyncio.create_task(reader())
        writer_task = asyncio.create_task(writer())
        ticker_task = asyncio.create_task(ticker())
        try:
            while True:
                message = await inbox.get()
                if message is None:
                    break
                message = coalesce_drag_samples(inbox, message)
                hub.log.record("in", message)
                async with hub.lock:
                    outputs = session.handle_message(message)
                hub.route(sub_id, outputs)
        finally:
            reader_task.cancel()
            ticker_task.cancel()
            queue.put_nowait(None)
            await asyncio.sleep(0)
            writer_task.cancel()
            hub.unsubscribe(sub_id)

    return app


def serve(config: ServeConfig) -> None:
    """Run the gateway until interrupted."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")

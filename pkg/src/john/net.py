"""WebSocket/HTTP front: binds the session core to the network.

One asyncio event loop owns everything. Each inbound frame is handled
synchronously on the loop (the command-loop contract: arrival order is the
serialization order), and outbound messages go through per-connection
queues so a slow client cannot block the others. A timer task drives the
transport at the configured tick rate and fans emissions out over OSC.

Liveness: the periodic Tick doubles as the server heartbeat; clients whose
protocol-level pongs stay silent for more than 30 s are dropped by the
WebSocket layer (ws_ping_interval / ws_ping_timeout below).
"""

from __future__ import annotations

import asyncio
import logging
import time
from contextlib import asynccontextmanager
from pathlib import Path

import uvicorn
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from . import protocol
from .osc import OscEndpoint, OscSender
from .server import BROADCAST, REQUESTER, SessionCore

log = logging.getLogger(__name__)

PING_INTERVAL = 10.0
PING_TIMEOUT = 30.0

# bundled web client, produced by `npm run build` in frontend/
FRONTEND_DIST = Path(__file__).resolve().parents[2] / "frontend" / "dist"


class SessionService:
    """Holds the core, the connection table, and the tick timer."""

    def __init__(self, core: SessionCore, osc: OscSender, tick_hz: int = 20):
        self.core = core
        self.osc = osc
        self.tick_period = 1.0 / tick_hz
        self.connections: dict[str, WebSocket] = {}
        # registered clients only; broadcasts go here
        self.queues: dict[str, asyncio.Queue[str | None]] = {}
        # connections that have not completed Hello yet: direct replies only
        self.pending: dict[str, asyncio.Queue[str | None]] = {}
        self.ticker: asyncio.Task | None = None

    def route(self, requester: str | None, result) -> None:
        """Queue outbound messages; requester receives REQUESTER-addressed
        replies (pre-registration errors)."""
        for dest, message in result.messages:
            text = protocol.encode_message(message)
            if dest is BROADCAST:
                for queue in self.queues.values():
                    queue.put_nowait(text)
            elif dest == REQUESTER and requester is not None:
                queue = self.pending.get(requester) or self.queues.get(requester)
                if queue is not None:
                    queue.put_nowait(text)
            elif dest in self.queues:
                self.queues[dest].put_nowait(text)
        self.osc.send_all(result.emissions)

    async def tick_loop(self) -> None:
        last = time.monotonic()
        while True:
            await asyncio.sleep(self.tick_period)
            now = time.monotonic()
            wall_dt = round((now - last) * 1000)
            last = now
            self.route(None, self.core.advance(wall_dt))

    async def pump(self, ws: WebSocket, queue: asyncio.Queue[str | None]) -> None:
        while True:
            text = await queue.get()
            if text is None:
                return
            await ws.send_text(text)


def build_app(service: SessionService) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        service.ticker = asyncio.create_task(service.tick_loop())
        try:
            yield
        finally:
            service.ticker.cancel()

    app = FastAPI(title="john", lifespan=lifespan)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        # anonymous until its Hello is accepted: no broadcasts yet
        conn_key = f"conn-{id(ws)}"
        queue: asyncio.Queue[str | None] = asyncio.Queue()
        service.pending[conn_key] = queue
        pump_task = asyncio.create_task(service.pump(ws, queue))
        client_id: str | None = None
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = protocol.decode_message(raw)
                except protocol.ProtocolError as exc:
                    queue.put_nowait(protocol.encode_message(protocol.envelope(
                        protocol.ERROR, service.core.rev,
                        {"code": "ProtocolError", "message": str(exc)})))
                    continue
                if client_id is None:
                    if msg["type"] != protocol.HELLO:
                        queue.put_nowait(protocol.encode_message(protocol.envelope(
                            protocol.ERROR, service.core.rev,
                            {"code": "NotConnected", "message": "send Hello first"})))
                        continue
                    result = service.core.handle_hello(msg)
                    accepted = next(
                        (m["payload"]["client"] for _, m in result.messages
                         if m["type"] == protocol.WELCOME), None)
                    # every Hello reply targets this connection; enqueue the
                    # Welcome (or error) before joining the broadcast set so
                    # no broadcast can precede it
                    for _, message in result.messages:
                        queue.put_nowait(protocol.encode_message(message))
                    if accepted is not None:
                        client_id = accepted
                        del service.pending[conn_key]
                        service.queues[client_id] = queue
                        service.connections[client_id] = ws
                        conn_key = client_id
                else:
                    service.route(client_id, service.core.handle(client_id, msg))
        except WebSocketDisconnect:
            pass
        finally:
            if client_id is not None:
                service.core.disconnect(client_id)
                service.connections.pop(client_id, None)
            service.queues.pop(conn_key, None)
            service.pending.pop(conn_key, None)
            queue.put_nowait(None)
            pump_task.cancel()

    if FRONTEND_DIST.is_dir():
        app.mount("/", StaticFiles(directory=FRONTEND_DIST, html=True), name="client")
    return app


def serve(
    core: SessionCore,
    host: str,
    port: int,
    osc_endpoints: list[OscEndpoint],
    tick_hz: int = 20,
) -> None:
    """Run the service until interrupted. Raises OSError if the port is taken."""
    service = SessionService(core, OscSender(osc_endpoints), tick_hz=tick_hz)
    app = build_app(service)
    config = uvicorn.Config(
        app,
        host=host,
        port=port,
        log_level="warning",
        ws_ping_interval=PING_INTERVAL,
        ws_ping_timeout=PING_TIMEOUT,
    )
    uvicorn.Server(config).run()

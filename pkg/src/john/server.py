"""Authoritative session core: serialized command handling, revision
broadcasts, and the in-process simulation harness.

The core is deliberately free of I/O. Network readers and the tick timer
feed commands in one at a time (the command loop contract); each handler
returns the messages to deliver and the raw transport emissions for the OSC
fan-out. Arrival order is the serialization order: the server state is a
fold of the accepted commands over the initial state, which is what makes
the session log a total record and replica convergence testable without a
network.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace as dc_replace
from typing import Any, Callable, Iterable

from . import protocol
from .generator import (
    GeneratorConstraints,
    Infeasible,
    InvalidConstraints,
    Rng,
    constraints_from_doc,
    constraints_to_doc,
    generate,
)
from .score import (
    AddBlock,
    EditError,
    Score,
    ScoreError,
    apply_edit,
    block_to_doc,
    edit_to_doc,
    parse_score,
    serialize_score,
)
from .transport import (
    STOPPED,
    TICK,
    Emission,
    Transport,
    TransportError,
)

BROADCAST = None  # destination marker

# destination for replies to a connection that has no client id yet
REQUESTER = ""


@dataclass
class HandleResult:
    """Outcome of one command: messages to deliver (destination None means
    every connected client) and transport emissions for the OSC sender."""

    messages: list[tuple[str | None, dict[str, Any]]] = field(default_factory=list)
    emissions: list[Emission] = field(default_factory=list)

    def send(self, dest: str | None, msg: dict[str, Any]) -> None:
        self.messages.append((dest, msg))


class SessionCore:
    """Single authority over one session's score, constraints, transport,
    and revision counter."""

    def __init__(
        self,
        initial_score: Score | None = None,
        constraints: GeneratorConstraints | None = None,
        server_seed: int = 0,
        log_sink: Callable[[dict[str, Any]], None] | None = None,
    ):
        self.score = initial_score if initial_score is not None else Score()
        self.constraints = constraints
        self.rev = 0
        self.clients: set[str] = set()
        self.rng = Rng(server_seed)
        self.transport = Transport(self.score, score_rev=0)
        self._log_sink = log_sink
        self._log(
            {
                "kind": "session",
                "seed": server_seed,
                "score": json.loads(serialize_score(self.score)),
                "constraints": constraints_to_doc(constraints) if constraints else None,
            }
        )

    # --- logging ---------------------------------------------------------

    def _log(self, entry: dict[str, Any]) -> None:
        if self._log_sink is not None:
            self._log_sink(entry)

    def _log_message(self, client_id: str, msg: dict[str, Any]) -> None:
        self._log({"kind": "message", "client": client_id, "msg": msg, "rev": self.rev})

    # --- helpers ---------------------------------------------------------

    def canonical_score(self) -> str:
        return serialize_score(self.score)

    def _error(self, result: HandleResult, dest: str, code: str, message: str,
               in_reply_to: str | None = None) -> None:
        payload = {"code": code, "message": message}
        if in_reply_to:
            payload["in_reply_to"] = in_reply_to
        result.send(dest, protocol.envelope(protocol.ERROR, self.rev, payload))

    def _broadcast_emissions(self, result: HandleResult, emissions: Iterable[Emission]) -> None:
        for em in emissions:
            if em.kind == TICK:
                result.send(BROADCAST, protocol.envelope(
                    protocol.TICK, self.rev,
                    {"pos": em.at, "playing": self.transport.playing}))
            else:
                block_doc = block_to_doc(em.block) if em.block is not None else None
                result.send(BROADCAST, protocol.envelope(
                    protocol.EVENT, self.rev,
                    protocol.event_payload(em.kind, em.at, block_doc)))

    def _transport_broadcast(self, result: HandleResult, cmd: str | None = None) -> None:
        payload: dict[str, Any] = {"transport": self.transport.snapshot()}
        if cmd:
            payload["cmd"] = cmd
        result.send(BROADCAST, protocol.envelope(protocol.TRANSPORT, self.rev, payload))

    def fresh_block_id(self) -> str:
        existing = {b.id for b in self.score.events}
        block_id = self.rng.block_id()
        while block_id in existing:
            block_id = self.rng.block_id()
        return block_id

    def fresh_client_id(self) -> str:
        client_id = f"c{self.rng.next_u64():016x}"
        while client_id in self.clients:
            client_id = f"c{self.rng.next_u64():016x}"
        return client_id

    # --- command handlers --------------------------------------------------

    def handle(self, client_id: str | None, msg: dict[str, Any]) -> HandleResult:
        """Dispatch one inbound client message. client_id is None only for a
        Hello, before an id is assigned."""
        msg_type = msg.get("type")
        if msg_type == protocol.HELLO:
            return self.handle_hello(msg)
        result = HandleResult()
        if client_id is None or client_id not in self.clients:
            self._error(result, client_id or REQUESTER, "NotConnected",
                        "send Hello first", msg_type)
            return result
        if msg_type == protocol.GENERATE_SCORE:
            return self.handle_generate(client_id, msg)
        if msg_type == protocol.EDIT_SCORE:
            return self.handle_edit(client_id, msg)
        if msg_type == protocol.TRANSPORT:
            return self.handle_transport(client_id, msg)
        self._error(result, client_id, "UnknownType",
                    f"unsupported message type {msg_type!r}", msg_type)
        return result

    def handle_hello(self, msg: dict[str, Any]) -> HandleResult:
        """Register a client and reply with the full session snapshot."""
        result = HandleResult()
        requested = msg.get("payload", {}).get("client")
        if requested is not None and not (isinstance(requested, str) and requested):
            self._error(result, REQUESTER, "BadPayload",
                        "client must be a non-empty string", protocol.HELLO)
            return result
        if requested in self.clients:
            self._error(result, REQUESTER, "DuplicateClient",
                        f"client id {requested!r} already connected", protocol.HELLO)
            return result
        client_id = requested if requested is not None else self.fresh_client_id()
        self.clients.add(client_id)
        self._log_message(client_id, msg)
        result.send(client_id, protocol.envelope(protocol.WELCOME, self.rev, {
            "client": client_id,
            "score": json.loads(self.canonical_score()),
            "transport": self.transport.snapshot(),
            "constraints": constraints_to_doc(self.constraints) if self.constraints else None,
        }))
        return result

    def disconnect(self, client_id: str) -> None:
        self.clients.discard(client_id)

    def handle_generate(self, client_id: str, msg: dict[str, Any]) -> HandleResult:
        """Replace the score with a fresh generation; the transport rewinds
        to 0 and pauses, ending anything still sounding."""
        result = HandleResult()
        try:
            constraints = constraints_from_doc(msg["payload"])
            score = generate(constraints)
        except (ScoreError, InvalidConstraints, Infeasible) as exc:
            self._error(result, client_id, type(exc).__name__, str(exc),
                        protocol.GENERATE_SCORE)
            return result
        self._log_message(client_id, msg)
        self.score = score
        self.constraints = constraints
        self.rev += 1
        emissions = self.transport.reset(score, self.rev)
        result.send(BROADCAST, protocol.envelope(protocol.SCORE_REPLACED, self.rev, {
            "score": json.loads(self.canonical_score()),
            "constraints": constraints_to_doc(constraints),
        }))
        self._broadcast_emissions(result, emissions)
        result.emissions.extend(emissions)
        return result

    def handle_edit(self, client_id: str, msg: dict[str, Any]) -> HandleResult:
        """Apply one edit atomically; on success broadcast the authoritative
        delta (with server-assigned ids filled in) to every client including
        the sender."""
        result = HandleResult()
        try:
            edit = protocol.edit_from_doc(msg["payload"])
        except EditError as exc:
            self._error(result, client_id, type(exc).__name__, str(exc),
                        protocol.EDIT_SCORE)
            return result
        if isinstance(edit, AddBlock) and not edit.block.id:
            edit = AddBlock(block=dc_replace(edit.block, id=self.fresh_block_id()))
        try:
            new_score = apply_edit(self.score, edit)
        except EditError as exc:
            self._error(result, client_id, type(exc).__name__, str(exc),
                        protocol.EDIT_SCORE)
            return result
        # the echoed edit is authoritative: server-assigned ids filled in
        edit_doc = edit_to_doc(edit)
        self._log_message(client_id, {
            "type": protocol.EDIT_SCORE, "rev": msg.get("rev", 0),
            "payload": edit_doc,
        })
        self.score = new_score
        self.rev += 1
        emissions = self.transport.set_score(new_score, self.rev)
        payload: dict[str, Any] = {"edit": edit_doc}
        target = edit.block.id if isinstance(edit, AddBlock) else getattr(edit, "id", None)
        if target is not None:
            block = new_score.block(target)
            payload["block"] = block_to_doc(block) if block is not None else None
        result.send(BROADCAST, protocol.envelope(protocol.SCORE_DELTA, self.rev, payload))
        self._broadcast_emissions(result, emissions)
        result.emissions.extend(emissions)
        return result

    def handle_transport(self, client_id: str, msg: dict[str, Any]) -> HandleResult:
        """play / pause / seek / speed, each a revision bump broadcasting
        the new transport snapshot plus any begin/end events."""
        result = HandleResult()
        payload = msg.get("payload", {})
        cmd = payload.get("cmd")
        try:
            if cmd == "play":
                emissions = self.transport.play()
            elif cmd == "pause":
                emissions = self.transport.pause()
            elif cmd == "seek":
                to = payload.get("to")
                if not isinstance(to, int) or isinstance(to, bool):
                    raise TransportError("seek needs integer 'to' milliseconds")
                emissions = self.transport.seek(to)
            elif cmd == "speed":
                speed = payload.get("speed")
                if not isinstance(speed, (int, float)) or isinstance(speed, bool):
                    raise TransportError("speed needs a numeric 'speed'")
                emissions = self.transport.set_speed(float(speed))
            else:
                raise TransportError(f"unknown transport command {cmd!r}")
        except TransportError as exc:
            self._error(result, client_id, type(exc).__name__, str(exc),
                        protocol.TRANSPORT)
            return result
        self._log_message(client_id, msg)
        self.rev += 1
        self._transport_broadcast(result, cmd)
        self._broadcast_emissions(result, emissions)
        result.emissions.extend(emissions)
        return result

    def advance(self, wall_dt: int) -> HandleResult:
        """Timer-driven wall-clock step. Broadcasts a liveness Tick even when
        paused; while playing, also the boundary events, and on reaching the
        end a Transport broadcast (one revision) for the automatic stop."""
        result = HandleResult()
        if not self.transport.playing:
            result.send(BROADCAST, protocol.envelope(protocol.TICK, self.rev, {
                "pos": self.transport.playhead, "playing": False}))
            return result
        self._log({"kind": "advance", "wall_dt": wall_dt, "rev": self.rev})
        emissions = self.transport.advance(wall_dt)
        stopped = any(em.kind == STOPPED for em in emissions)
        if stopped:
            self.rev += 1
            self._transport_broadcast(result, "stop")
        self._broadcast_emissions(result, emissions)
        result.emissions.extend(emissions)
        return result


# --- Session log -------------------------------------------------------------

class SessionLog:
    """Append-only JSONL sink; one entry per accepted command, in
    serialization order."""

    def __init__(self, path: str):
        self.path = path
        self._fh = open(path, "a", encoding="utf-8")

    def __call__(self, entry: dict[str, Any]) -> None:
        self._fh.write(json.dumps(entry, separators=(",", ":"), ensure_ascii=False))
        self._fh.write("\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def replay_log(entries: Iterable[dict[str, Any]]) -> SessionCore:
    """Rebuild the session by folding a log over the initial state. The log
    records the server seed and every accepted command, so the fold lands on
    the identical final state (and canonical score bytes)."""
    entries = iter(entries)
    try:
        header = next(entries)
    except StopIteration:
        raise ValueError("empty session log") from None
    if header.get("kind") != "session":
        raise ValueError("session log must start with a session header")
    initial = Score() if header["score"] is None else _score_from_doc(header["score"])
    constraints = (
        constraints_from_doc(header["constraints"]) if header.get("constraints") else None
    )
    core = SessionCore(
        initial_score=initial, constraints=constraints, server_seed=header["seed"]
    )
    for entry in entries:
        if entry["kind"] == "message":
            msg = entry["msg"]
            if msg["type"] == protocol.HELLO:
                core.handle_hello(msg)
            else:
                core.handle(entry["client"], msg)
        elif entry["kind"] == "advance":
            core.advance(entry["wall_dt"])
    return core


def load_log(path: str) -> list[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _score_from_doc(doc: dict[str, Any]) -> Score:
    return parse_score(json.dumps(doc))


# --- Simulation harness ------------------------------------------------------

@dataclass
class SimResult:
    server: SessionCore
    replicas: dict[str, protocol.Replica]
    log: list[dict[str, Any]]
    broadcast_revs: list[int] = field(default_factory=list)


def run_simulated(
    client_ids: list[str],
    script: Iterable[tuple[Any, ...]] | Callable[[SessionCore], Iterable[tuple[Any, ...]]],
    initial_score: Score | None = None,
    constraints: GeneratorConstraints | None = None,
    server_seed: int = 0,
) -> SimResult:
    """Execute the full protocol in-process, no network: every client
    connects with Hello, then the script runs in order. Script entries are
    ("msg", client_id, message_dict) or ("advance", wall_dt); a callable
    script receives the live core so entries can target current block ids.
    Returns the final server core and every client replica for equality
    assertions."""
    log: list[dict[str, Any]] = []
    core = SessionCore(
        initial_score=initial_score,
        constraints=constraints,
        server_seed=server_seed,
        log_sink=log.append,
    )
    replicas = {cid: protocol.Replica() for cid in client_ids}
    connected: list[str] = []
    state_revs: list[int] = []

    def deliver(result: HandleResult) -> None:
        for dest, message in result.messages:
            if message["type"] in protocol.STATE_TYPES:
                state_revs.append(message["rev"])
            if dest is BROADCAST:
                for cid in connected:
                    replicas[cid].apply(message)
            elif dest in replicas:
                replicas[dest].apply(message)

    for cid in client_ids:
        result = core.handle_hello(
            protocol.envelope(protocol.HELLO, 0, {"client": cid})
        )
        connected.append(cid)
        deliver(result)

    entries = script(core) if callable(script) else script
    for entry in entries:
        if entry[0] == "msg":
            _, cid, message = entry
            deliver(core.handle(cid, message))
        elif entry[0] == "advance":
            deliver(core.advance(entry[1]))
        else:
            raise ValueError(f"unknown script entry {entry!r}")

    return SimResult(server=core, replicas=replicas, log=log, broadcast_revs=state_revs)

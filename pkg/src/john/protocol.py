"""Wire protocol: JSON message envelopes and the client-side replica.

Every frame is one JSON object {"type": ..., "rev": ..., "payload": {...}}.
State-changing broadcasts (ScoreDelta, ScoreReplaced, Transport) carry a
revision exactly one above the previous; Tick, Event and Error are stamped
with the current revision and bump nothing. A replica that applies every
broadcast in order holds a score whose canonical serialization is
byte-identical to the server's.

Message catalog (see docs/protocol.md for payload schemas):
  client to server: Hello, GenerateScore, EditScore, Transport
  server to client: Welcome, ScoreDelta, ScoreReplaced, Transport, Tick,
                    Event, Error
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .score import (
    AddBlock,
    Score,
    ScoreError,
    apply_edit,
    block_from_doc,
    edit_from_doc,
    parse_score,
    serialize_score,
)

HELLO = "Hello"
WELCOME = "Welcome"
GENERATE_SCORE = "GenerateScore"
EDIT_SCORE = "EditScore"
TRANSPORT = "Transport"
TICK = "Tick"
EVENT = "Event"
SCORE_DELTA = "ScoreDelta"
SCORE_REPLACED = "ScoreReplaced"
ERROR = "Error"

CLIENT_TYPES = (HELLO, GENERATE_SCORE, EDIT_SCORE, TRANSPORT)
SERVER_TYPES = (WELCOME, SCORE_DELTA, SCORE_REPLACED, TRANSPORT, TICK, EVENT, ERROR)

# messages that advance the revision stream by exactly one
STATE_TYPES = (SCORE_DELTA, SCORE_REPLACED, TRANSPORT)


class ProtocolError(ValueError):
    pass


class ReplicaDesync(RuntimeError):
    """The replica received a broadcast it cannot reconcile (gap in the
    revision stream or an inapplicable authoritative edit)."""


def envelope(msg_type: str, rev: int, payload: dict[str, Any] | None = None) -> dict[str, Any]:
    return {"type": msg_type, "rev": rev, "payload": payload or {}}


def encode_message(msg: dict[str, Any]) -> str:
    return json.dumps(msg, separators=(",", ":"), ensure_ascii=False)


def decode_message(text: str | bytes) -> dict[str, Any]:
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"frame is not valid JSON: {exc}") from None
    if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
        raise ProtocolError("frame must be an object with a string 'type'")
    if not isinstance(msg.get("rev", 0), int):
        raise ProtocolError("'rev' must be an integer")
    payload = msg.setdefault("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("'payload' must be an object")
    msg.setdefault("rev", 0)
    return msg


@dataclass
class Replica:
    """Client-side mirror of the session: score, transport snapshot, and the
    last applied revision. apply() enforces the gap-free revision stream."""

    client_id: str = ""
    rev: int = -1
    score: Score = field(default_factory=Score)
    transport: dict[str, Any] = field(default_factory=dict)
    constraints: dict[str, Any] | None = None
    errors: list[dict[str, Any]] = field(default_factory=list)

    def canonical_score(self) -> str:
        return serialize_score(self.score)

    def _check_rev(self, msg: dict[str, Any]) -> None:
        rev = msg["rev"]
        if msg["type"] in STATE_TYPES:
            if rev != self.rev + 1:
                raise ReplicaDesync(
                    f"{msg['type']} carries rev {rev}, expected {self.rev + 1}"
                )
        elif rev != self.rev:
            raise ReplicaDesync(
                f"{msg['type']} stamped rev {rev}, replica is at {self.rev}"
            )

    def apply(self, msg: dict[str, Any]) -> None:
        msg_type = msg["type"]
        payload = msg["payload"]
        if msg_type == WELCOME:
            self.client_id = payload["client"]
            self.rev = msg["rev"]
            self.score = parse_score(json.dumps(payload["score"]))
            self.transport = dict(payload["transport"])
            self.constraints = payload.get("constraints")
            return
        if self.rev < 0:
            raise ReplicaDesync("received a broadcast before Welcome")
        self._check_rev(msg)

        if msg_type == SCORE_DELTA:
            edit = edit_from_doc(payload["edit"])
            if isinstance(edit, AddBlock) and not edit.block.id:
                raise ReplicaDesync("authoritative AddBlock without an id")
            try:
                self.score = apply_edit(self.score, edit)
            except ScoreError as exc:
                raise ReplicaDesync(f"authoritative edit failed: {exc}") from exc
            self.rev = msg["rev"]
        elif msg_type == SCORE_REPLACED:
            self.score = parse_score(json.dumps(payload["score"]))
            if "constraints" in payload:
                self.constraints = payload["constraints"]
            # generation rewinds and pauses; nothing is sounding
            self.transport = {
                "playing": False,
                "speed": self.transport.get("speed", 1.0),
                "pos": 0.0,
                "active": [],
                "score_rev": msg["rev"],
            }
            self.rev = msg["rev"]
        elif msg_type == TRANSPORT:
            self.transport = dict(payload["transport"])
            self.rev = msg["rev"]
        elif msg_type == TICK:
            self.transport["pos"] = payload["pos"]
            self.transport["playing"] = payload["playing"]
        elif msg_type == EVENT:
            active = set(self.transport.get("active", []))
            if payload["kind"] == "begin":
                active.add(payload["block"]["id"])
            elif payload["kind"] == "end":
                active.discard(payload["block"]["id"])
            self.transport["active"] = sorted(active)
        elif msg_type == ERROR:
            self.errors.append(payload)
        else:
            raise ReplicaDesync(f"unexpected message type {msg_type!r}")


def event_payload(kind: str, at: float, block_doc: dict[str, Any] | None) -> dict[str, Any]:
    payload: dict[str, Any] = {"kind": kind, "at": at}
    if block_doc is not None:
        payload["block"] = block_doc
    return payload


__all__ = [
    "HELLO", "WELCOME", "GENERATE_SCORE", "EDIT_SCORE", "TRANSPORT", "TICK",
    "EVENT", "SCORE_DELTA", "SCORE_REPLACED", "ERROR", "CLIENT_TYPES",
    "SERVER_TYPES", "STATE_TYPES", "ProtocolError", "ReplicaDesync",
    "envelope", "encode_message", "decode_message", "Replica", "event_payload",
    "block_from_doc",
]

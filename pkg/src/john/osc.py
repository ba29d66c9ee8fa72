"""OSC 1.0 message encoding and UDP delivery of transport emissions.

Instruments and lighting rigs receive plain OSC messages, one per UDP
datagram (no bundles; a plain message receiver is all a Max or Pd patch
needs):

    /john/time        f   playhead in seconds
    /john/event/begin s i s s f f   id, track, karma, nuance, start s, duration s
    /john/event/end   s i           id, track
    /john/stop        (no arguments)

Times on the wire are float32 seconds while documents use integer
milliseconds; the conversion is exact to within float32 precision
(under 0.5 ms at hour scale).
"""

from __future__ import annotations

import logging
import socket
import struct
from dataclasses import dataclass

from .transport import BEGIN, END, STOPPED, TICK, Emission

log = logging.getLogger(__name__)

OscArg = int | float | str


class BadAddress(ValueError):
    """OSC addresses are ASCII and start with '/'."""


class UnsupportedType(TypeError):
    """Only int32, float32 and string arguments are supported."""


@dataclass(frozen=True)
class OscMessage:
    address: str
    args: tuple[OscArg, ...] = ()


@dataclass(frozen=True)
class OscEndpoint:
    host: str
    port: int

    @classmethod
    def parse(cls, spec: str) -> OscEndpoint:
        host, sep, port = spec.rpartition(":")
        if not sep or not host:
            raise ValueError(f"endpoint {spec!r}: expected host:port")
        return cls(host=host, port=int(port))

    def __str__(self) -> str:
        return f"{self.host}:{self.port}"


def _pad_string(data: bytes) -> bytes:
    """Null-terminate and zero-pad to a multiple of 4 bytes (1-4 nulls)."""
    return data + b"\0" * (4 - len(data) % 4)


def encode_osc(msg: OscMessage) -> bytes:
    """Exact OSC 1.0 bytes: padded address, padded ','-prefixed type tags,
    then arguments, each padded to 4 bytes, numbers big-endian."""
    if not isinstance(msg.address, str) or not msg.address.startswith("/"):
        raise BadAddress(f"address {msg.address!r} must start with '/'")
    try:
        address = msg.address.encode("ascii")
    except UnicodeEncodeError:
        raise BadAddress(f"address {msg.address!r} is not ASCII") from None
    if b"\0" in address:
        raise BadAddress("address must not contain null bytes")

    tags = b","
    body = b""
    for arg in msg.args:
        if isinstance(arg, bool):
            raise UnsupportedType("booleans are not supported")
        elif isinstance(arg, int):
            if not -(1 << 31) <= arg < (1 << 31):
                raise UnsupportedType(f"{arg} does not fit int32")
            tags += b"i"
            body += struct.pack(">i", arg)
        elif isinstance(arg, float):
            tags += b"f"
            body += struct.pack(">f", arg)
        elif isinstance(arg, str):
            encoded = arg.encode("utf-8")
            if b"\0" in encoded:
                raise UnsupportedType("strings must not contain null bytes")
            tags += b"s"
            body += _pad_string(encoded)
        else:
            raise UnsupportedType(f"unsupported argument type {type(arg).__name__}")
    return _pad_string(address) + _pad_string(tags) + body


def osc_for_emission(emission: Emission) -> OscMessage:
    """Map a transport emission to its wire message."""
    if emission.kind == TICK:
        return OscMessage("/john/time", (emission.at / 1000.0,))
    if emission.kind == BEGIN:
        b = emission.block
        assert b is not None
        return OscMessage(
            "/john/event/begin",
            (b.id, b.track, b.karma, b.nuance, b.start / 1000.0, b.duration / 1000.0),
        )
    if emission.kind == END:
        b = emission.block
        assert b is not None
        return OscMessage("/john/event/end", (b.id, b.track))
    if emission.kind == STOPPED:
        return OscMessage("/john/stop")
    raise ValueError(f"unknown emission kind {emission.kind!r}")


def emit(emission: Emission, endpoints: list[OscEndpoint]) -> list[tuple[OscEndpoint, OscMessage]]:
    """The (endpoint, message) fan-out for one emission: every configured
    endpoint receives the same message as a single datagram."""
    msg = osc_for_emission(emission)
    return [(ep, msg) for ep in endpoints]


class OscSender:
    """Fire-and-forget UDP sender. Per-endpoint failures are logged and
    never raised: a dead lighting rig must not halt the performance."""

    def __init__(self, endpoints: list[OscEndpoint]):
        self.endpoints = list(endpoints)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

    def send(self, emission: Emission) -> None:
        for endpoint, msg in emit(emission, self.endpoints):
            try:
                self._sock.sendto(encode_osc(msg), (endpoint.host, endpoint.port))
            except OSError as exc:
                log.warning("OSC send to %s failed: %s", endpoint, exc)

    def send_all(self, emissions: list[Emission]) -> None:
        for emission in emissions:
            self.send(emission)

    def close(self) -> None:
        self._sock.close()

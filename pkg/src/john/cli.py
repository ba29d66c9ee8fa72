"""Operator entry point.

    john serve    --port N --osc host:port --tick-hz N --score PATH --log PATH
    john generate --constraints PATH [--seed N] --out PATH
    john validate --score PATH --constraints PATH [--json]
    john play     --score PATH [--speed X] [--from MS] [--osc host:port]...

Every subcommand is scriptable: deterministic exit codes (0 success,
1 domain failure such as violations or infeasible constraints, 2 bad
invocation) and machine-readable output where it matters. JOHN_PORT
overrides the default serve port.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .generator import (
    Infeasible,
    InvalidConstraints,
    generate,
    load_constraints,
    validate,
)
from .osc import OscEndpoint, OscSender
from .score import ScoreError, parse_score, serialize_score
from .transport import Transport

DEFAULT_PORT = 8765
DEFAULT_TICK_HZ = 20


class BadConfig(ValueError):
    pass


class PortInUse(OSError):
    pass


@dataclass
class Config:
    listen_port: int = DEFAULT_PORT
    host: str = "0.0.0.0"
    osc_endpoints: list[OscEndpoint] = field(default_factory=list)
    tick_hz: int = DEFAULT_TICK_HZ
    score_path: str | None = None
    constraints_path: str | None = None
    log_path: str = "john-session.jsonl"

    def check(self) -> None:
        if not 1 <= self.tick_hz <= 100:
            raise BadConfig(f"tick rate {self.tick_hz} outside [1, 100] Hz")
        if not 0 < self.listen_port < 65536:
            raise BadConfig(f"port {self.listen_port} out of range")


def _default_port() -> int:
    env = os.environ.get("JOHN_PORT")
    if env is None:
        return DEFAULT_PORT
    try:
        return int(env)
    except ValueError:
        raise BadConfig(f"JOHN_PORT={env!r} is not an integer") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BadConfig(f"cannot read {path}: {exc}") from None


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import SessionCore, SessionLog
    from . import net

    config = Config(
        listen_port=args.port if args.port is not None else _default_port(),
        host=args.host,
        osc_endpoints=[OscEndpoint.parse(s) for s in args.osc],
        tick_hz=args.tick_hz,
        score_path=args.score,
        constraints_path=args.constraints,
        log_path=args.log,
    )
    config.check()

    initial = None
    if config.score_path:
        initial = parse_score(_read(config.score_path))
    constraints = None
    if config.constraints_path:
        constraints = load_constraints(_read(config.constraints_path))

    # fail fast with a clear message instead of a uvicorn stack trace
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((config.host, config.listen_port))
    except OSError as exc:
        raise PortInUse(f"port {config.listen_port} unavailable: {exc}") from None
    finally:
        probe.close()

    session_log = SessionLog(config.log_path)
    core = SessionCore(
        initial_score=initial,
        constraints=constraints,
        server_seed=args.server_seed if args.server_seed is not None else time.time_ns() & ((1 << 64) - 1),
        log_sink=session_log,
    )
    print(f"serving on ws://{config.host}:{config.listen_port}/ws "
          f"(tick {config.tick_hz} Hz, log {config.log_path})")
    try:
        net.serve(core, config.host, config.listen_port,
                  config.osc_endpoints, tick_hz=config.tick_hz)
    finally:
        session_log.close()
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    constraints = load_constraints(_read(args.constraints))
    if args.seed is not None:
        constraints = replace(constraints, seed=args.seed)
        constraints.check()
    try:
        score = generate(constraints)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    document = serialize_score(score)
    Path(args.out).write_text(document, encoding="utf-8")
    print(f"wrote {args.out}: {len(score.events)} events, "
          f"{score.duration} ms, {len(score.tracks)} tracks")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    score = parse_score(_read(args.score))
    constraints = load_constraints(_read(args.constraints))
    violations = validate(score, constraints)
    if args.json:
        print(json.dumps(
            {"violations": [v.to_doc() for v in violations], "count": len(violations)},
            separators=(",", ":")))
    else:
        for v in violations:
            print(f"{v.kind.value} at {v.at}: {v.detail}")
        print(f"{len(violations)} violations")
    return 0 if not violations else 1


def cmd_play(args: argparse.Namespace, clock=time.monotonic, sleep=time.sleep) -> int:
    """Headless playback: drive the transport against the wall clock and
    send every emission over OSC until the score ends."""
    score = parse_score(_read(args.score))
    start = args.from_ms
    if not 0 <= start <= score.duration:
        raise BadConfig(f"--from {start} outside [0, {score.duration}]")
    if not 1 <= args.tick_hz <= 100:
        raise BadConfig(f"tick rate {args.tick_hz} outside [1, 100] Hz")
    transport = Transport(score, position=start, speed=args.speed)
    sender = OscSender([OscEndpoint.parse(s) for s in args.osc])
    period = 1.0 / args.tick_hz
    try:
        sender.send_all(transport.play())
        anchor = clock()
        sent_wall = 0
        while transport.playing:
            sleep(period)
            total = round((clock() - anchor) * 1000)
            emissions = transport.advance(total - sent_wall)
            sent_wall = total
            sender.send_all(emissions)
    finally:
        sender.close()
    print(f"playback complete at {int(transport.playhead)} ms")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="john")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the collaborative session server")
    p_serve.add_argument("--port", type=int, default=None,
                         help=f"protocol port (default {DEFAULT_PORT}, env JOHN_PORT)")
    p_serve.add_argument("--host", default="0.0.0.0")
    p_serve.add_argument("--osc", action="append", default=[], metavar="HOST:PORT",
                         help="OSC endpoint, repeatable")
    p_serve.add_argument("--tick-hz", type=int, default=DEFAULT_TICK_HZ)
    p_serve.add_argument("--score", default=None, help="initial score document")
    p_serve.add_argument("--constraints", default=None, help="default constraints")
    p_serve.add_argument("--log", default="john-session.jsonl",
                         help="append-only session log (JSONL)")
    p_serve.add_argument("--server-seed", type=int, default=None,
                         help="seed for server-assigned ids (testing)")
    p_serve.set_defaults(func=cmd_serve)

    p_gen = sub.add_parser("generate", help="generate a score from constraints")
    p_gen.add_argument("--constraints", required=True)
    p_gen.add_argument("--seed", type=int, default=None,
                       help="override the seed in the constraints file")
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_val = sub.add_parser("validate", help="check a score against constraints")
    p_val.add_argument("--score", required=True)
    p_val.add_argument("--constraints", required=True)
    p_val.add_argument("--json", action="store_true")
    p_val.set_defaults(func=cmd_validate)

    p_play = sub.add_parser("play", help="headless playback to OSC")
    p_play.add_argument("--score", required=True)
    p_play.add_argument("--speed", type=float, default=1.0)
    p_play.add_argument("--from", dest="from_ms", type=int, default=0, metavar="MS")
    p_play.add_argument("--osc", action="append", default=[], metavar="HOST:PORT")
    p_play.add_argument("--tick-hz", type=int, default=DEFAULT_TICK_HZ)
    p_play.set_defaults(func=cmd_play)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 0
    except (ScoreError, InvalidConstraints, Infeasible, BadConfig, PortInUse, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

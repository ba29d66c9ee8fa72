"""Constraint-based score generation and validation.

Generation divides the timeline into contiguous segments whose lengths all
lie in [min_block, max_block] and sum exactly to the total duration, then
staffs each segment with a random subset of tracks, each getting one block
with a random karma and nuance. Everything is driven by a seeded splitmix64
stream, so identical constraints and seed reproduce the identical score in
any implementation.

Validation is the checker side: it reports every way a score breaks a
constraint set, including a sweep over block boundaries asserting that the
number of simultaneously playing tracks stays within [min_players,
max_players] on every elementary interval.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .score import (
    NUANCES,
    Score,
    ScoreBlock,
    SchemaViolation,
    is_karma,
    nuance_ordinal,
)

_MASK64 = (1 << 64) - 1


class Infeasible(ValueError):
    """No segment count N satisfies N*min_block <= total <= N*max_block."""


class InvalidConstraints(ValueError):
    """The constraint set breaks its own invariants."""


@dataclass
class Rng:
    """splitmix64 stream; identical seed gives the identical stream in every
    implementation language."""

    state: int

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform_int(self, a: int, b: int) -> int:
        """Uniform integer in [a, b]. Plain modulo: the bias at 64-bit scale
        is negligible and cross-language reproducibility matters more."""
        if b < a:
            raise ValueError(f"empty range [{a}, {b}]")
        return a + self.next_u64() % (b - a + 1)

    def uniform_index(self, n: int) -> int:
        return self.uniform_int(0, n - 1)

    def block_id(self) -> str:
        """32 lowercase hex chars from two draws, high word first."""
        hi = self.next_u64()
        lo = self.next_u64()
        return f"{hi:016x}{lo:016x}"


@dataclass(frozen=True)
class GeneratorConstraints:
    total_duration: int
    min_players: int
    max_players: int
    min_block: int
    max_block: int
    karmas: tuple[str, ...]
    nuance_lo: str = "ppp"
    nuance_hi: str = "fff"
    track_names: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "karmas", tuple(self.karmas))
        object.__setattr__(self, "track_names", tuple(self.track_names))

    def check(self) -> None:
        """Raise InvalidConstraints on any broken invariant."""
        if self.total_duration < 0:
            raise InvalidConstraints("total_duration must be >= 0")
        if self.min_block < 1:
            raise InvalidConstraints("min_block must be >= 1 ms")
        if self.min_block > self.max_block:
            raise InvalidConstraints("min_block must be <= max_block")
        if self.min_players < 0:
            raise InvalidConstraints("min_players must be >= 0")
        if self.max_players < 1:
            raise InvalidConstraints("max_players must be >= 1")
        if self.min_players > self.max_players:
            raise InvalidConstraints("min_players must be <= max_players")
        if self.max_players > len(self.track_names):
            raise InvalidConstraints("max_players must be <= number of tracks")
        if not self.karmas or not all(is_karma(k) for k in self.karmas):
            raise InvalidConstraints("karmas must be a non-empty list of valid tokens")
        if self.nuance_lo not in NUANCES or self.nuance_hi not in NUANCES:
            raise InvalidConstraints(f"nuances must be in {NUANCES}")
        if nuance_ordinal(self.nuance_lo) > nuance_ordinal(self.nuance_hi):
            raise InvalidConstraints("nuance_lo must not be louder than nuance_hi")
        if not 0 <= self.seed <= _MASK64:
            raise InvalidConstraints("seed must be an unsigned 64-bit integer")
        if not is_feasible(self.total_duration, self.min_block, self.max_block):
            raise InvalidConstraints(
                f"no block count N satisfies N*{self.min_block} <= "
                f"{self.total_duration} <= N*{self.max_block}"
            )


def is_feasible(total: int, dmin: int, dmax: int) -> bool:
    """True iff total == 0 or some integer N >= 1 has N*dmin <= total <= N*dmax."""
    if total == 0:
        return True
    # smallest admissible N is ceil(total/dmax); it works iff N*dmin <= total
    n = -(-total // dmax)
    return n * dmin <= total


def partition_timeline(total: int, dmin: int, dmax: int, rng: Rng) -> list[int]:
    """Split total into segments, each in [dmin, dmax], summing exactly to
    total, or raise Infeasible when no segment count can do it.

    Draws the segment count uniformly over the admissible range, then each
    length from the window that keeps the remainder completable by the
    segments still to come. One pass, integer-exact, and a pure function of
    the rng state. (A naive draw-and-restart walk is not an option here: on
    tight dmax/dmin ratios its success probability per attempt collapses to
    nearly zero, so no retry budget can make it reliable.)
    """
    if total == 0:
        return []
    count_lo = -(-total // dmax)
    count_hi = total // dmin
    if count_lo > count_hi:
        raise Infeasible(
            f"no block count N satisfies N*{dmin} <= {total} <= N*{dmax}"
        )
    count = rng.uniform_int(count_lo, count_hi)
    segments: list[int] = []
    remaining = total
    for left in range(count, 0, -1):
        lo = max(dmin, remaining - (left - 1) * dmax)
        hi = min(dmax, remaining - (left - 1) * dmin)
        d = rng.uniform_int(lo, hi)
        segments.append(d)
        remaining -= d
    return segments


def generate(c: GeneratorConstraints) -> Score:
    """Random score proposition satisfying c; a pure function of c (seed
    included). For each timeline segment, a uniform player count k in
    [min_players, max_players] picks k distinct tracks via a partial
    Fisher-Yates shuffle; each chosen track gets one block spanning the
    whole segment."""
    c.check()
    rng = Rng(c.seed)
    segments = partition_timeline(c.total_duration, c.min_block, c.max_block, rng)
    lo = nuance_ordinal(c.nuance_lo)
    hi = nuance_ordinal(c.nuance_hi)
    n = len(c.track_names)
    blocks: list[ScoreBlock] = []
    pos = 0
    for seg in segments:
        k = rng.uniform_int(c.min_players, c.max_players)
        indices = list(range(n))
        for i in range(k):
            j = rng.uniform_int(i, n - 1)
            indices[i], indices[j] = indices[j], indices[i]
        for track in sorted(indices[:k]):
            karma = c.karmas[rng.uniform_index(len(c.karmas))]
            nuance = NUANCES[rng.uniform_int(lo, hi)]
            blocks.append(
                ScoreBlock(
                    id=rng.block_id(),
                    track=track,
                    start=pos,
                    duration=seg,
                    karma=karma,
                    nuance=nuance,
                )
            )
        pos += seg
    return Score(
        tracks=c.track_names, duration=c.total_duration, events=tuple(blocks)
    )


# --- Validation --------------------------------------------------------------

class ViolationKind(str, Enum):
    TRACK_OVERLAP = "TrackOverlap"
    OUT_OF_BOUNDS = "OutOfBounds"
    BLOCK_TOO_SHORT = "BlockTooShort"
    BLOCK_TOO_LONG = "BlockTooLong"
    TOO_FEW_PLAYERS = "TooFewPlayers"
    TOO_MANY_PLAYERS = "TooManyPlayers"
    UNKNOWN_KARMA = "UnknownKarma"
    NUANCE_OUT_OF_RANGE = "NuanceOutOfRange"
    DUPLICATE_ID = "DuplicateId"


@dataclass(frozen=True)
class Violation:
    """One way a score breaks a constraint set; pinpoints a block id or a
    time instant."""

    kind: ViolationKind
    at: int | str
    detail: str = field(default="", compare=False)

    def to_doc(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "at": self.at, "detail": self.detail}


def validate(score: Score, c: GeneratorConstraints) -> list[Violation]:
    """Every violation of c in score. Accepts arbitrary scores, including
    corrupted ones; an empty result means the score satisfies c."""
    violations: list[Violation] = []
    lo = nuance_ordinal(c.nuance_lo)
    hi = nuance_ordinal(c.nuance_hi)
    total = c.total_duration

    seen: set[str] = set()
    for b in score.events:
        if b.duration < c.min_block:
            violations.append(Violation(
                ViolationKind.BLOCK_TOO_SHORT, b.id,
                f"duration {b.duration} < min_block {c.min_block}"))
        if b.duration > c.max_block:
            violations.append(Violation(
                ViolationKind.BLOCK_TOO_LONG, b.id,
                f"duration {b.duration} > max_block {c.max_block}"))
        if b.start < 0 or b.end > total:
            violations.append(Violation(
                ViolationKind.OUT_OF_BOUNDS, b.id,
                f"[{b.start}, {b.end}) outside [0, {total}]"))
        if b.karma not in c.karmas:
            violations.append(Violation(
                ViolationKind.UNKNOWN_KARMA, b.id,
                f"karma {b.karma!r} not in vocabulary"))
        ordinal = NUANCES.index(b.nuance) if b.nuance in NUANCES else None
        if ordinal is None or not lo <= ordinal <= hi:
            violations.append(Violation(
                ViolationKind.NUANCE_OUT_OF_RANGE, b.id,
                f"nuance {b.nuance!r} outside [{c.nuance_lo}, {c.nuance_hi}]"))
        if b.id in seen:
            violations.append(Violation(
                ViolationKind.DUPLICATE_ID, b.id, "block id already used"))
        seen.add(b.id)

    # per-track overlap: events are start-sorted, so track the running end
    furthest: dict[int, ScoreBlock] = {}
    for b in score.events:
        prev = furthest.get(b.track)
        if prev is not None and b.start < prev.end:
            violations.append(Violation(
                ViolationKind.TRACK_OVERLAP, b.id,
                f"overlaps {prev.id} on track {b.track}"))
        if prev is None or b.end > prev.end:
            furthest[b.track] = b

    violations.extend(_concurrency_violations(score, c))
    return violations


def _concurrency_violations(score: Score, c: GeneratorConstraints) -> list[Violation]:
    """Sweep block boundaries: on every non-empty elementary interval inside
    [0, total), the count of distinct active tracks must lie in
    [min_players, max_players]. Ends apply before begins at equal times."""
    total = c.total_duration
    if total == 0:
        return []
    # boundary events clipped to the score window; -1 sorts ends first
    events: list[tuple[int, int, int]] = []
    points = {0, total}
    for b in score.events:
        start = max(b.start, 0)
        end = min(b.end, total)
        if start >= end:
            continue  # entirely outside the window
        events.append((start, +1, b.track))
        events.append((end, -1, b.track))
        points.add(start)
        points.add(end)
    events.sort(key=lambda e: (e[0], e[1]))
    boundaries = sorted(p for p in points if 0 <= p <= total)

    violations: list[Violation] = []
    counts: dict[int, int] = {}
    active_tracks = 0
    idx = 0
    for x, y in zip(boundaries, boundaries[1:]):
        while idx < len(events) and events[idx][0] <= x:
            _, delta, track = events[idx]
            before = counts.get(track, 0)
            after = before + delta
            counts[track] = after
            if before == 0 and after == 1:
                active_tracks += 1
            elif before == 1 and after == 0:
                active_tracks -= 1
            idx += 1
        if active_tracks < c.min_players:
            violations.append(Violation(
                ViolationKind.TOO_FEW_PLAYERS, x,
                f"{active_tracks} active in [{x}, {y}), min {c.min_players}"))
        elif active_tracks > c.max_players:
            violations.append(Violation(
                ViolationKind.TOO_MANY_PLAYERS, x,
                f"{active_tracks} active in [{x}, {y}), max {c.max_players}"))
    return violations


# --- Constraints wire codec --------------------------------------------------

def constraints_to_doc(c: GeneratorConstraints) -> dict[str, Any]:
    return {
        "total_duration": c.total_duration,
        "min_players": c.min_players,
        "max_players": c.max_players,
        "min_block": c.min_block,
        "max_block": c.max_block,
        "karmas": list(c.karmas),
        "nuance_lo": c.nuance_lo,
        "nuance_hi": c.nuance_hi,
        "track_names": list(c.track_names),
        "seed": c.seed,
    }


def constraints_from_doc(doc: Any) -> GeneratorConstraints:
    """Decode a constraints document; raises SchemaViolation on structural
    problems and InvalidConstraints on broken invariants."""
    if not isinstance(doc, dict):
        raise SchemaViolation("constraints: expected an object")
    required = {
        "total_duration": int, "min_players": int, "max_players": int,
        "min_block": int, "max_block": int, "karmas": list,
    }
    for key, kind in required.items():
        if key not in doc:
            raise SchemaViolation(f"constraints: missing field {key!r}")
        if not isinstance(doc[key], kind) or isinstance(doc[key], bool):
            raise SchemaViolation(f"constraints.{key}: expected {kind.__name__}")
    karmas = doc["karmas"]
    if not all(isinstance(k, str) for k in karmas):
        raise SchemaViolation("constraints.karmas: expected a list of strings")
    track_names = doc.get("track_names", [])
    if not isinstance(track_names, list) or not all(
        isinstance(t, str) and t for t in track_names
    ):
        raise SchemaViolation("constraints.track_names: expected non-empty strings")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise SchemaViolation("constraints.seed: expected an integer")
    c = GeneratorConstraints(
        total_duration=doc["total_duration"],
        min_players=doc["min_players"],
        max_players=doc["max_players"],
        min_block=doc["min_block"],
        max_block=doc["max_block"],
        karmas=tuple(karmas),
        nuance_lo=doc.get("nuance_lo", "ppp"),
        nuance_hi=doc.get("nuance_hi", "fff"),
        track_names=tuple(track_names),
        seed=seed,
    )
    c.check()
    return c


def load_constraints(text: str | bytes) -> GeneratorConstraints:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"constraints: not valid JSON: {exc}") from None
    return constraints_from_doc(doc)

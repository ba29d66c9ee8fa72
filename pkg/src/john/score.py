"""Score document model: timed blocks on named tracks.

A score is the shared document of a session: an ordered list of track names,
a total duration, and a list of blocks. Each block occupies the half-open
interval [start, start + duration) on one track and carries a karma (mood
label) and a nuance (dynamic marking). All times are exact integer
milliseconds.

The serialized form is canonical: fixed key order, events sorted by
(start, track, id), compact separators. Byte equality of two serialized
documents is equivalent to equality of the scores they describe.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Union

SCHEMA_VERSION = 1

# Ordered dynamics, softest to loudest. Ordinal = index.
NUANCES = ("ppp", "pp", "p", "mp", "mf", "f", "ff", "fff")

EMPTY_SCORE_DOCUMENT = '{"version":1,"tracks":[],"duration":0,"events":[]}'

_BLOCK_ID_RE = re.compile(r"\A[0-9a-f]{32}\Z")


class ScoreError(ValueError):
    """Base class for score document errors."""


class MalformedDocument(ScoreError):
    """The document is not well-formed JSON."""


class SchemaViolation(ScoreError):
    """A field is missing, has the wrong type, or holds an invalid value."""


class InvariantViolation(ScoreError):
    """The document is well-formed but breaks a score invariant."""


class EditError(ScoreError):
    """Base class for edit rejections. The input score is never modified."""


class UnknownBlock(EditError):
    """The edit targets a block id that is not in the score."""


class WouldOverlap(EditError):
    """Applying the edit would make two blocks overlap on one track."""


class OutOfRange(EditError):
    """Applying the edit would push a block outside [0, score duration]."""


class BadPayload(EditError):
    """The edit payload is malformed or invalid."""


def nuance_ordinal(symbol: str) -> int:
    """Ordinal of a dynamic symbol, 0 (ppp) through 7 (fff)."""
    try:
        return NUANCES.index(symbol)
    except ValueError:
        raise SchemaViolation(f"unknown nuance {symbol!r}") from None


def is_nuance(symbol: object) -> bool:
    return isinstance(symbol, str) and symbol in NUANCES


def is_karma(label: object) -> bool:
    """Karma labels are non-empty tokens without whitespace or '/' so they
    can embed in OSC addresses and file names."""
    if not isinstance(label, str) or not label:
        return False
    return not any(ch.isspace() or ch == "/" for ch in label)


def is_block_id(value: object) -> bool:
    """Block ids are exactly 32 lowercase hex characters."""
    return isinstance(value, str) and bool(_BLOCK_ID_RE.match(value))


def _is_int(value: object) -> bool:
    # bool is an int subclass; documents must use real integers
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True)
class ScoreBlock:
    """One timed event: a block on one track over [start, start + duration).

    ``extras`` carries unknown per-event properties verbatim so that
    documents written by future versions round-trip unchanged.
    """

    id: str
    track: int
    start: int
    duration: int
    karma: str
    nuance: str
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def end(self) -> int:
        return self.start + self.duration

    def sort_key(self) -> tuple[int, int, str]:
        return (self.start, self.track, self.id)


@dataclass(frozen=True)
class Score:
    """The shared document: tracks, total duration, and blocks.

    Events are normalized to canonical order (start, track, id) on
    construction, so structural equality matches canonical byte equality.
    Construction does not validate invariants; see validate_score.
    """

    version: int = SCHEMA_VERSION
    tracks: tuple[str, ...] = ()
    duration: int = 0
    events: tuple[ScoreBlock, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tracks", tuple(self.tracks))
        object.__setattr__(
            self, "events", tuple(sorted(self.events, key=ScoreBlock.sort_key))
        )

    def block(self, block_id: str) -> ScoreBlock | None:
        for b in self.events:
            if b.id == block_id:
                return b
        return None


def validate_score(score: Score) -> None:
    """Raise InvariantViolation unless the score satisfies all invariants:
    valid per-block fields, track indices in range, blocks inside
    [0, duration], no same-track overlap, distinct ids."""
    seen: set[str] = set()
    last_on_track: dict[int, ScoreBlock] = {}
    for b in score.events:
        if not is_block_id(b.id):
            raise InvariantViolation(f"block id {b.id!r} is not 32 lowercase hex chars")
        if b.id in seen:
            raise InvariantViolation(f"duplicate block id {b.id}")
        seen.add(b.id)
        if not 0 <= b.track < len(score.tracks):
            raise InvariantViolation(
                f"block {b.id}: track {b.track} out of range for {len(score.tracks)} tracks"
            )
        if b.duration < 1:
            raise InvariantViolation(f"block {b.id}: duration must be >= 1 ms")
        if b.start < 0 or b.end > score.duration:
            raise InvariantViolation(
                f"block {b.id}: [{b.start}, {b.end}) outside score [0, {score.duration}]"
            )
        if not is_karma(b.karma):
            raise InvariantViolation(f"block {b.id}: invalid karma {b.karma!r}")
        if not is_nuance(b.nuance):
            raise InvariantViolation(f"block {b.id}: invalid nuance {b.nuance!r}")
        prev = last_on_track.get(b.track)
        # events are sorted by start, so per-track overlap is adjacent
        if prev is not None and b.start < prev.end:
            raise InvariantViolation(
                f"overlap on track {b.track}: blocks {prev.id} and {b.id}"
            )
        if prev is None or b.end > prev.end:
            last_on_track[b.track] = b


def _canon_extra(value: Any) -> Any:
    """Canonicalize an opaque extra value: sort object keys recursively."""
    if isinstance(value, dict):
        return {k: _canon_extra(value[k]) for k in sorted(value)}
    if isinstance(value, list):
        return [_canon_extra(v) for v in value]
    return value


def block_to_doc(block: ScoreBlock) -> dict[str, Any]:
    props: dict[str, Any] = {"karma": block.karma, "nuance": block.nuance}
    for key in sorted(block.extras):
        props[key] = _canon_extra(block.extras[key])
    return {
        "id": block.id,
        "track": block.track,
        "start": block.start,
        "duration": block.duration,
        "props": props,
    }


def serialize_score(score: Score) -> str:
    """Canonical UTF-8 document: fixed key order, events sorted by
    (start, track, id), compact separators, raw (unescaped) non-ASCII."""
    doc = {
        "version": score.version,
        "tracks": list(score.tracks),
        "duration": score.duration,
        "events": [block_to_doc(b) for b in score.events],
    }
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def _require(doc: dict[str, Any], key: str, path: str) -> Any:
    if key not in doc:
        raise SchemaViolation(f"{path}: missing required field {key!r}")
    return doc[key]


def block_from_doc(doc: Any, path: str = "event") -> ScoreBlock:
    if not isinstance(doc, dict):
        raise SchemaViolation(f"{path}: expected an object")
    block_id = _require(doc, "id", path)
    if not is_block_id(block_id):
        raise SchemaViolation(f"{path}.id: expected 32 lowercase hex chars")
    track = _require(doc, "track", path)
    if not _is_int(track) or track < 0:
        raise SchemaViolation(f"{path}.track ({block_id}): expected integer >= 0")
    start = _require(doc, "start", path)
    if not _is_int(start) or start < 0:
        raise SchemaViolation(f"{path}.start ({block_id}): expected integer ms >= 0")
    duration = _require(doc, "duration", path)
    if not _is_int(duration) or duration < 1:
        raise SchemaViolation(f"{path}.duration ({block_id}): expected integer ms >= 1")
    props = _require(doc, "props", path)
    if not isinstance(props, dict):
        raise SchemaViolation(f"{path}.props ({block_id}): expected an object")
    karma = _require(props, "karma", f"{path}.props")
    if not is_karma(karma):
        raise SchemaViolation(f"{path}.props.karma ({block_id}): invalid token {karma!r}")
    nuance = _require(props, "nuance", f"{path}.props")
    if not is_nuance(nuance):
        raise SchemaViolation(f"{path}.props.nuance ({block_id}): expected one of {NUANCES}")
    extras = {k: v for k, v in props.items() if k not in ("karma", "nuance")}
    unknown = set(doc) - {"id", "track", "start", "duration", "props"}
    if unknown:
        raise SchemaViolation(f"{path} ({block_id}): unknown fields {sorted(unknown)}")
    return ScoreBlock(
        id=block_id, track=track, start=start, duration=duration,
        karma=karma, nuance=nuance, extras=extras,
    )


def parse_score(text: str | bytes) -> Score:
    """Parse and fully validate a score document.

    Raises MalformedDocument for bad JSON, SchemaViolation for structural
    problems, InvariantViolation for overlap / out-of-range / duplicate ids.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("top level: expected an object")
    version = _require(doc, "version", "top level")
    if version != SCHEMA_VERSION:
        raise SchemaViolation(f"version: expected {SCHEMA_VERSION}, got {version!r}")
    tracks = _require(doc, "tracks", "top level")
    if not isinstance(tracks, list) or any(
        not isinstance(t, str) or not t for t in tracks
    ):
        raise SchemaViolation("tracks: expected a list of non-empty strings")
    duration = _require(doc, "duration", "top level")
    if not _is_int(duration) or duration < 0:
        raise SchemaViolation("duration: expected integer ms >= 0")
    events = _require(doc, "events", "top level")
    if not isinstance(events, list):
        raise SchemaViolation("events: expected a list")
    blocks = [block_from_doc(e, f"events[{i}]") for i, e in enumerate(events)]
    score = Score(
        version=version, tracks=tuple(tracks), duration=duration, events=tuple(blocks)
    )
    validate_score(score)
    return score


def active_events(score: Score, t: int) -> set[str]:
    """Ids of blocks active at time t: start <= t < start + duration."""
    if t < 0:
        raise ValueError("t must be >= 0")
    active: set[str] = set()
    for b in score.events:
        if b.start > t:
            break  # events sorted by start
        if t < b.end:
            active.add(b.id)
    return active


# --- Edits -----------------------------------------------------------------

@dataclass(frozen=True)
class MoveBlock:
    id: str
    start: int


@dataclass(frozen=True)
class ResizeBlock:
    id: str
    duration: int


@dataclass(frozen=True)
class SetKarma:
    id: str
    karma: str


@dataclass(frozen=True)
class SetNuance:
    id: str
    nuance: str


@dataclass(frozen=True)
class AddBlock:
    block: ScoreBlock


@dataclass(frozen=True)
class DeleteBlock:
    id: str


@dataclass(frozen=True)
class ReplaceScore:
    score: Score


Edit = Union[MoveBlock, ResizeBlock, SetKarma, SetNuance, AddBlock, DeleteBlock, ReplaceScore]


def _check_placement(
    others: Iterable[ScoreBlock], candidate: ScoreBlock, duration: int
) -> None:
    if candidate.start < 0 or candidate.end > duration:
        raise OutOfRange(
            f"block {candidate.id}: [{candidate.start}, {candidate.end}) "
            f"outside score [0, {duration}]"
        )
    for other in others:
        if other.track != candidate.track:
            continue
        if candidate.start < other.end and other.start < candidate.end:
            raise WouldOverlap(
                f"block {candidate.id} would overlap {other.id} on track {candidate.track}"
            )


def _find(score: Score, block_id: str) -> ScoreBlock:
    b = score.block(block_id)
    if b is None:
        raise UnknownBlock(f"no block with id {block_id!r}")
    return b


def apply_edit(score: Score, edit: Edit) -> Score:
    """Apply an edit, returning a new valid score. Rejections raise an
    EditError subclass and leave the input untouched."""
    if isinstance(edit, ReplaceScore):
        try:
            validate_score(edit.score)
        except InvariantViolation as exc:
            raise BadPayload(f"replacement score invalid: {exc}") from None
        return edit.score

    if isinstance(edit, AddBlock):
        b = edit.block
        if not is_block_id(b.id):
            raise BadPayload(f"new block id {b.id!r} is not 32 lowercase hex chars")
        if score.block(b.id) is not None:
            raise BadPayload(f"block id {b.id} already in score")
        if not _is_int(b.track) or not 0 <= b.track < len(score.tracks):
            raise BadPayload(f"track {b.track!r} out of range")
        if not _is_int(b.start) or not _is_int(b.duration) or b.duration < 1:
            raise BadPayload("start must be an integer and duration an integer >= 1")
        if not is_karma(b.karma):
            raise BadPayload(f"invalid karma {b.karma!r}")
        if not is_nuance(b.nuance):
            raise BadPayload(f"invalid nuance {b.nuance!r}")
        _check_placement(score.events, b, score.duration)
        return replace(score, events=score.events + (b,))

    if isinstance(edit, DeleteBlock):
        b = _find(score, edit.id)
        return replace(score, events=tuple(e for e in score.events if e.id != b.id))

    if isinstance(edit, MoveBlock):
        b = _find(score, edit.id)
        if not _is_int(edit.start):
            raise BadPayload("start must be an integer")
        moved = replace(b, start=edit.start)
        _check_placement(
            (e for e in score.events if e.id != b.id), moved, score.duration
        )
        return replace(
            score, events=tuple(moved if e.id == b.id else e for e in score.events)
        )

    if isinstance(edit, ResizeBlock):
        b = _find(score, edit.id)
        if not _is_int(edit.duration) or edit.duration < 1:
            raise BadPayload("duration must be an integer >= 1")
        resized = replace(b, duration=edit.duration)
        _check_placement(
            (e for e in score.events if e.id != b.id), resized, score.duration
        )
        return replace(
            score, events=tuple(resized if e.id == b.id else e for e in score.events)
        )

    if isinstance(edit, SetKarma):
        b = _find(score, edit.id)
        if not is_karma(edit.karma):
            raise BadPayload(f"invalid karma {edit.karma!r}")
        updated = replace(b, karma=edit.karma)
        return replace(
            score, events=tuple(updated if e.id == b.id else e for e in score.events)
        )

    if isinstance(edit, SetNuance):
        b = _find(score, edit.id)
        if not is_nuance(edit.nuance):
            raise BadPayload(f"invalid nuance {edit.nuance!r}")
        updated = replace(b, nuance=edit.nuance)
        return replace(
            score, events=tuple(updated if e.id == b.id else e for e in score.events)
        )

    raise BadPayload(f"unknown edit {edit!r}")


# --- Edit wire codec --------------------------------------------------------

def edit_to_doc(edit: Edit) -> dict[str, Any]:
    if isinstance(edit, MoveBlock):
        return {"kind": "MoveBlock", "id": edit.id, "start": edit.start}
    if isinstance(edit, ResizeBlock):
        return {"kind": "ResizeBlock", "id": edit.id, "duration": edit.duration}
    if isinstance(edit, SetKarma):
        return {"kind": "SetKarma", "id": edit.id, "karma": edit.karma}
    if isinstance(edit, SetNuance):
        return {"kind": "SetNuance", "id": edit.id, "nuance": edit.nuance}
    if isinstance(edit, AddBlock):
        return {"kind": "AddBlock", "block": block_to_doc(edit.block)}
    if isinstance(edit, DeleteBlock):
        return {"kind": "DeleteBlock", "id": edit.id}
    if isinstance(edit, ReplaceScore):
        return {
            "kind": "ReplaceScore",
            "score": json.loads(serialize_score(edit.score)),
        }
    raise BadPayload(f"unknown edit {edit!r}")


def edit_from_doc(doc: Any) -> Edit:
    """Decode an edit from its wire form. Raises BadPayload on anything
    malformed; for AddBlock the block id may be absent (the server assigns
    one before applying)."""
    if not isinstance(doc, dict):
        raise BadPayload("edit: expected an object")
    kind = doc.get("kind")

    def need(key: str) -> Any:
        if key not in doc:
            raise BadPayload(f"edit {kind}: missing field {key!r}")
        return doc[key]

    def need_id() -> str:
        value = need("id")
        if not isinstance(value, str):
            raise BadPayload(f"edit {kind}: id must be a string")
        return value

    if kind == "MoveBlock":
        start = need("start")
        if not _is_int(start):
            raise BadPayload("MoveBlock: start must be an integer")
        return MoveBlock(id=need_id(), start=start)
    if kind == "ResizeBlock":
        duration = need("duration")
        if not _is_int(duration):
            raise BadPayload("ResizeBlock: duration must be an integer")
        return ResizeBlock(id=need_id(), duration=duration)
    if kind == "SetKarma":
        karma = need("karma")
        if not isinstance(karma, str):
            raise BadPayload("SetKarma: karma must be a string")
        return SetKarma(id=need_id(), karma=karma)
    if kind == "SetNuance":
        nuance = need("nuance")
        if not isinstance(nuance, str):
            raise BadPayload("SetNuance: nuance must be a string")
        return SetNuance(id=need_id(), nuance=nuance)
    if kind == "AddBlock":
        block_doc = dict(need("block")) if isinstance(doc.get("block"), dict) else None
        if block_doc is None:
            raise BadPayload("AddBlock: block must be an object")
        has_id = "id" in block_doc
        block_doc.setdefault("id", "0" * 32)
        try:
            block = block_from_doc(block_doc, "AddBlock.block")
        except SchemaViolation as exc:
            raise BadPayload(str(exc)) from None
        if not has_id:
            # empty id marks "unassigned"; the server stamps a fresh one
            # from its own rng before applying
            block = replace(block, id="")
        return AddBlock(block=block)
    if kind == "DeleteBlock":
        return DeleteBlock(id=need_id())
    if kind == "ReplaceScore":
        try:
            parsed = parse_score(json.dumps(need("score")))
        except ScoreError as exc:
            raise BadPayload(f"ReplaceScore: {exc}") from None
        return ReplaceScore(score=parsed)
    raise BadPayload(f"unknown edit kind {kind!r}")

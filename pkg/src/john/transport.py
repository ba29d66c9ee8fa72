"""Shared playback engine: one anchored playhead, speed control, seek, and
precise begin/end notifications at block boundaries.

The playhead is never accumulated incrementally: it is always
anchor_pos + elapsed_wall * speed, recomputed from the anchor in a single
multiplication, so advancing in many small wall-time chunks lands on exactly
the same positions as one large chunk. All mutation happens inside the
server's single serialized command loop; the engine itself is
single-threaded by contract.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .score import Score, ScoreBlock, active_events

MIN_SPEED = 0.1
MAX_SPEED = 10.0

# emission kinds, in tie-break order: ends fire before begins so exact
# tilings are a handoff, not a double-activation; ticks and stop come last
END = "end"
BEGIN = "begin"
TICK = "tick"
STOPPED = "stopped"

_KIND_RANK = {END: 0, BEGIN: 1, TICK: 2, STOPPED: 3}


class TransportError(RuntimeError):
    pass


class AlreadyPlaying(TransportError):
    pass


class NotPlaying(TransportError):
    pass


class SpeedOutOfRange(TransportError):
    pass


class SeekOutOfRange(TransportError):
    pass


@dataclass(frozen=True)
class Emission:
    """One notification: a begin/end boundary, a playhead tick, or the final
    stop. ``at`` is in score milliseconds (block boundaries are integers;
    ticks may carry a fractional playhead)."""

    kind: str
    at: float
    block: ScoreBlock | None = None

    def sort_key(self) -> tuple[float, int, tuple[int, int, str]]:
        block_key = self.block.sort_key() if self.block else (0, 0, "")
        return (self.at, _KIND_RANK[self.kind], block_key)


@dataclass
class TransportState:
    playing: bool = False
    speed: float = 1.0
    anchor_pos: float = 0.0
    elapsed_wall: int = 0
    active: frozenset[str] = frozenset()
    score_rev: int = 0


class Transport:
    """Playback over one score. Methods return the emissions they caused;
    the caller fans them out to clients and instruments."""

    def __init__(
        self,
        score: Score,
        score_rev: int = 0,
        position: int = 0,
        speed: float = 1.0,
    ):
        if not MIN_SPEED <= speed <= MAX_SPEED:
            raise SpeedOutOfRange(f"speed {speed} outside [{MIN_SPEED}, {MAX_SPEED}]")
        if not 0 <= position <= score.duration:
            raise SeekOutOfRange(f"position {position} outside [0, {score.duration}]")
        self.score = score
        self.state = TransportState(
            speed=speed, anchor_pos=float(position), score_rev=score_rev
        )
        self._index_score()

    def _index_score(self) -> None:
        by_start = sorted(self.score.events, key=lambda b: (b.start, b.track, b.id))
        by_end = sorted(self.score.events, key=lambda b: (b.end, b.track, b.id))
        self._starts = [b.start for b in by_start]
        self._blocks_by_start = by_start
        self._ends = [b.end for b in by_end]
        self._blocks_by_end = by_end
        self._by_id = {b.id: b for b in self.score.events}

    @property
    def playhead(self) -> float:
        return self.state.anchor_pos + self.state.elapsed_wall * self.state.speed

    @property
    def playing(self) -> bool:
        return self.state.playing

    def current_active(self) -> set[str]:
        return active_events(self.score, math.floor(self.playhead))

    def _anchor(self, position: float) -> None:
        self.state.anchor_pos = position
        self.state.elapsed_wall = 0

    def _diff_batch(self, at: float, new_active: set[str], old_blocks: dict[str, ScoreBlock] | None = None) -> list[Emission]:
        """Ends for blocks leaving the active set, begins for blocks entering
        it, all stamped at the moment the change takes effect."""
        blocks = old_blocks or self._by_id
        old = self.state.active
        out = [
            Emission(END, at, blocks[i]) for i in old - new_active if i in blocks
        ] + [
            Emission(BEGIN, at, self._by_id[i]) for i in new_active - old
        ]
        out.sort(key=Emission.sort_key)
        self.state.active = frozenset(new_active)
        return out

    def play(self) -> list[Emission]:
        """Start playback at the current playhead. Emits a begin for every
        block active there that the instruments were not already told about
        (none after a plain pause)."""
        if self.state.playing:
            raise AlreadyPlaying("transport is already playing")
        self._anchor(self.playhead)
        self.state.playing = True
        return self._diff_batch(self.playhead, self.current_active())

    def pause(self) -> list[Emission]:
        """Freeze the playhead. No emissions: pause is suspension, the
        instruments keep their state."""
        if not self.state.playing:
            raise NotPlaying("transport is not playing")
        self._anchor(self.playhead)
        self.state.playing = False
        return []

    def set_speed(self, speed: float) -> list[Emission]:
        """Change the score-time-per-wall-time multiplier, re-anchoring so
        the playhead does not move."""
        if not isinstance(speed, (int, float)) or not MIN_SPEED <= speed <= MAX_SPEED:
            raise SpeedOutOfRange(f"speed {speed} outside [{MIN_SPEED}, {MAX_SPEED}]")
        self._anchor(self.playhead)
        self.state.speed = float(speed)
        return []

    def seek(self, to: int) -> list[Emission]:
        """Relocate the playhead. Unlike pause, seeking notifies: blocks left
        behind end, blocks jumped into begin."""
        if not 0 <= to <= self.score.duration:
            raise SeekOutOfRange(f"seek to {to} outside [0, {self.score.duration}]")
        self._anchor(float(to))
        return self._diff_batch(float(to), self.current_active())

    def advance(self, wall_dt: int) -> list[Emission]:
        """Move wall time forward. Emits an end for every block boundary the
        playhead swept over, in timestamp order with ends before begins at
        ties, then one tick at the new playhead; reaching the end of the
        score stops playback and emits a final stop."""
        if wall_dt < 0:
            raise ValueError("wall_dt must be >= 0")
        if not self.state.playing:
            return []
        p = self.playhead
        self.state.elapsed_wall += wall_dt
        p2 = self.playhead
        duration = self.score.duration
        stopping = p2 >= duration
        if stopping:
            p2 = float(duration)
            self._anchor(p2)

        out: list[Emission] = []
        # boundaries crossed in the half-open window (p, p2]
        lo = bisect_right(self._starts, p)
        hi = bisect_right(self._starts, p2)
        begun = self._blocks_by_start[lo:hi]
        begun_ids = {b.id for b in begun}
        out.extend(Emission(BEGIN, float(b.start), b) for b in begun)
        lo = bisect_right(self._ends, p)
        hi = bisect_right(self._ends, p2)
        for b in self._blocks_by_end[lo:hi]:
            # a block swept over entirely begins and ends in the same batch
            if b.id in self.state.active or b.id in begun_ids:
                out.append(Emission(END, float(b.end), b))
        out.sort(key=Emission.sort_key)

        active = set(self.state.active)
        for em in out:
            if em.kind == BEGIN:
                active.add(em.block.id)
            elif em.kind == END:
                active.discard(em.block.id)
        self.state.active = frozenset(active)

        out.append(Emission(TICK, p2))
        if stopping:
            self.state.playing = False
            out.append(Emission(STOPPED, p2))
        return out

    def set_score(self, score: Score, score_rev: int) -> list[Emission]:
        """Swap in an edited score mid-flight. While playing, the active set
        is recomputed against the new score and the difference is notified,
        the same rule as seek. While stopped or paused, only ends go out
        (blocks that no longer cover the playhead); nothing new starts
        sounding until play resyncs. A playhead beyond the new end is
        clamped, stopping playback if it was running."""
        old_blocks = self._by_id
        self.score = score
        self.state.score_rev = score_rev
        self._index_score()
        out: list[Emission] = []
        position = self.playhead
        if position > score.duration:
            position = float(score.duration)
            self._anchor(position)
        new_active = self.current_active()
        if not self.state.playing:
            new_active &= set(self.state.active)
        out.extend(self._diff_batch(position, new_active, old_blocks))
        if self.state.playing and position >= score.duration:
            self._anchor(float(score.duration))
            self.state.playing = False
            out.append(Emission(STOPPED, float(score.duration)))
        return out

    def reset(self, score: Score, score_rev: int) -> list[Emission]:
        """Replace the score wholesale: stop, rewind to 0, and end every
        block the instruments still consider sounding. Begins for blocks at
        0 wait for the next play."""
        old_blocks = self._by_id
        ended = sorted(
            (old_blocks[i] for i in self.state.active if i in old_blocks),
            key=ScoreBlock.sort_key,
        )
        self.score = score
        self.state = TransportState(speed=self.state.speed, score_rev=score_rev)
        self._index_score()
        return [Emission(END, 0.0, b) for b in ended]

    def snapshot(self) -> dict:
        """Wire form of the transport state."""
        return {
            "playing": self.state.playing,
            "speed": self.state.speed,
            "pos": self.playhead,
            "active": sorted(self.state.active),
            "score_rev": self.state.score_rev,
        }

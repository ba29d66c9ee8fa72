"""Shared builders, strategies, and brute-force oracles.

The oracles here are deliberately independent of the implementation paths
they check: active sets by linear scan, concurrency by sampling the player
count at every block boundary (and one millisecond after it), feasibility
by exhaustive search over segment counts.
"""

from __future__ import annotations

import random

from hypothesis import strategies as st

from john.generator import GeneratorConstraints, Violation, ViolationKind
from john.score import NUANCES, Score, ScoreBlock

KARMAS = ("calm", "storm", "drone", "pulse", "swarm", "glass")


def make_block(i: int, track: int, start: int, duration: int,
               karma: str = "calm", nuance: str = "mf", **extras) -> ScoreBlock:
    return ScoreBlock(
        id=f"{i:032x}", track=track, start=start, duration=duration,
        karma=karma, nuance=nuance, extras=extras,
    )


def make_score(tracks: int, duration: int, blocks: list[ScoreBlock]) -> Score:
    return Score(
        tracks=tuple(f"t{i}" for i in range(tracks)),
        duration=duration,
        events=tuple(blocks),
    )


def make_constraints(**overrides) -> GeneratorConstraints:
    base = dict(
        total_duration=60_000, min_players=1, max_players=3,
        min_block=5_000, max_block=20_000, karmas=KARMAS,
        nuance_lo="pp", nuance_hi="ff",
        track_names=("guitar", "synth", "drums"), seed=1,
    )
    base.update(overrides)
    return GeneratorConstraints(**base)


# --- hypothesis strategies ----------------------------------------------------

karma_st = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8)

extras_st = st.dictionaries(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyz_", min_size=1, max_size=6).filter(
        lambda k: k not in ("karma", "nuance")
    ),
    st.one_of(
        st.integers(-1000, 1000),
        st.text(max_size=8),
        st.booleans(),
        st.lists(st.integers(0, 9), max_size=3),
        st.dictionaries(st.text(alphabet="xyz", min_size=1, max_size=2),
                        st.integers(0, 9), max_size=2),
    ),
    max_size=3,
)


_lane_st = st.lists(
    st.tuples(st.integers(0, 4000), st.integers(1, 6000)), max_size=4
)


@st.composite
def scores_st(draw, max_tracks: int = 4):
    """A valid score, built per track by walking forward over drawn
    (gap, length) pairs so blocks never overlap; independent of the
    generator module."""
    lanes = draw(st.lists(_lane_st, max_size=max_tracks))
    id_base = draw(st.integers(0, 1 << 100))
    blocks: list[ScoreBlock] = []
    counter = 0
    top = 0
    for track, lane in enumerate(lanes):
        pos = 0
        for gap, length in lane:
            blocks.append(ScoreBlock(
                id=f"{id_base + counter:032x}",
                track=track,
                start=pos + gap,
                duration=length,
                karma=draw(karma_st),
                nuance=draw(st.sampled_from(NUANCES)),
                extras=draw(extras_st),
            ))
            counter += 1
            pos += gap + length
        top = max(top, pos)
    duration = top + draw(st.integers(0, 5000))
    return Score(
        tracks=tuple(f"track{i}" for i in range(len(lanes))),
        duration=duration,
        events=tuple(blocks),
    )


# --- oracles -------------------------------------------------------------------

def active_scan(score: Score, t: int) -> set[str]:
    """Brute-force active set: linear scan over all blocks."""
    return {b.id for b in score.events if b.start <= t < b.end}


def exhaustive_feasible(total: int, dmin: int, dmax: int) -> bool:
    """Feasibility by exhaustive search over every admissible segment count."""
    if total == 0:
        return True
    for n in range(1, total // dmin + 1):
        if n * dmin <= total <= n * dmax:
            return True
    return False


def concurrency_oracle(score: Score, c: GeneratorConstraints) -> set[tuple[str, int]]:
    """Player-count violations by sampling the distinct-track count at every
    block boundary inside [0, T) and at boundary+1 ms (the +1 sample
    cross-checks that the count is constant between boundaries)."""
    total = c.total_duration
    if total == 0:
        return set()

    def tracks_at(t: int) -> int:
        return len({b.track for b in score.events if b.start <= t < b.end})

    points = {0}
    for b in score.events:
        for p in (b.start, b.end):
            if 0 <= p < total:
                points.add(p)
    ordered = sorted(points)
    out: set[tuple[str, int]] = set()
    for i, x in enumerate(ordered):
        count = tracks_at(x)
        nxt = ordered[i + 1] if i + 1 < len(ordered) else total
        if x + 1 < nxt:
            assert tracks_at(x + 1) == count, f"count not constant after {x}"
        if count < c.min_players:
            out.add((ViolationKind.TOO_FEW_PLAYERS.value, x))
        elif count > c.max_players:
            out.add((ViolationKind.TOO_MANY_PLAYERS.value, x))
    return out


def concurrency_found(violations: list[Violation]) -> set[tuple[str, int]]:
    return {
        (v.kind.value, v.at)
        for v in violations
        if v.kind in (ViolationKind.TOO_FEW_PLAYERS, ViolationKind.TOO_MANY_PLAYERS)
    }


def corrupt_score(score: Score, c: GeneratorConstraints, rng: random.Random) -> Score:
    """Apply 1-3 random mutations that may break any constraint: overlaps,
    bound violations, bad vocabulary, duplicated ids, thinned or stacked
    segments. The result intentionally bypasses Score validation."""
    blocks = [b for b in score.events]
    for _ in range(rng.randint(1, 3)):
        kind = rng.choice([
            "shift", "stretch", "shrink", "karma", "nuance",
            "dup_id", "drop", "stack", "overflow",
        ])
        if not blocks and kind not in ("stack",):
            continue
        if kind == "shift":
            i = rng.randrange(len(blocks))
            b = blocks[i]
            delta = rng.choice([-1, 1]) * rng.randint(1, max(b.duration, 2))
            blocks[i] = ScoreBlock(b.id, b.track, b.start + delta, b.duration,
                                   b.karma, b.nuance, b.extras)
        elif kind == "stretch":
            i = rng.randrange(len(blocks))
            b = blocks[i]
            blocks[i] = ScoreBlock(b.id, b.track, b.start,
                                   b.duration + rng.randint(1, c.max_block),
                                   b.karma, b.nuance, b.extras)
        elif kind == "shrink":
            i = rng.randrange(len(blocks))
            b = blocks[i]
            blocks[i] = ScoreBlock(b.id, b.track, b.start,
                                   rng.randint(1, max(1, c.min_block - 1)),
                                   b.karma, b.nuance, b.extras)
        elif kind == "karma":
            i = rng.randrange(len(blocks))
            b = blocks[i]
            blocks[i] = ScoreBlock(b.id, b.track, b.start, b.duration,
                                   "zzznotakarma", b.nuance, b.extras)
        elif kind == "nuance":
            # any symbol; whether it violates the range is the oracle's call
            i = rng.randrange(len(blocks))
            b = blocks[i]
            blocks[i] = ScoreBlock(b.id, b.track, b.start, b.duration,
                                   b.karma, rng.choice(NUANCES), b.extras)
        elif kind == "dup_id" and len(blocks) >= 2:
            i, j = rng.sample(range(len(blocks)), 2)
            b = blocks[i]
            other = blocks[j]
            blocks[i] = ScoreBlock(other.id, b.track, b.start, b.duration,
                                   b.karma, b.nuance, b.extras)
        elif kind == "drop":
            del blocks[rng.randrange(len(blocks))]
        elif kind == "stack":
            start = rng.randint(0, max(0, c.total_duration - c.min_block))
            blocks.append(ScoreBlock(
                id=f"{rng.getrandbits(128):032x}",
                track=rng.randrange(max(1, len(score.tracks))),
                start=start,
                duration=rng.randint(c.min_block, c.max_block),
                karma=rng.choice(list(c.karmas)),
                nuance=rng.choice(NUANCES),
            ))
        elif kind == "overflow":
            i = rng.randrange(len(blocks))
            b = blocks[i]
            blocks[i] = ScoreBlock(b.id, b.track,
                                   c.total_duration - b.duration // 2, b.duration,
                                   b.karma, b.nuance, b.extras)
    return Score(tracks=score.tracks, duration=score.duration, events=tuple(blocks))

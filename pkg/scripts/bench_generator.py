#!/usr/bin/env python3
"""Throughput check: generate and validate hour-long septet scores."""

import sys
import time

from john.generator import GeneratorConstraints, generate, validate

CONSTRAINTS = GeneratorConstraints(
    total_duration=3_600_000,
    min_players=1,
    max_players=7,
    min_block=30_000,
    max_block=300_000,
    karmas=("calm", "storm", "drone", "pulse", "swarm", "glass"),
    nuance_lo="ppp",
    nuance_hi="fff",
    track_names=tuple(f"p{i}" for i in range(1, 8)),
    seed=0,
)


def main(rounds: int = 200) -> None:
    blocks = 0
    started = time.monotonic()
    for seed in range(rounds):
        score = generate(GeneratorConstraints(
            **{**CONSTRAINTS.__dict__, "seed": seed}))
        assert validate(score, CONSTRAINTS) == []
        blocks += len(score.events)
    elapsed = time.monotonic() - started
    print(f"{rounds} hour-long scores ({blocks} blocks) generated+validated "
          f"in {elapsed:.2f} s ({rounds / elapsed:.0f} scores/s)")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200)

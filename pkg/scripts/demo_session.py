#!/usr/bin/env python3
"""In-process walkthrough: generate a short score, edit it from two
simulated clients, then play it through the transport and print the
emission log the instruments would receive."""

import json

from john import protocol
from john.generator import GeneratorConstraints, generate, validate
from john.osc import osc_for_emission
from john.score import serialize_score
from john.server import run_simulated
from john.transport import Transport

CONSTRAINTS = GeneratorConstraints(
    total_duration=60_000,
    min_players=1,
    max_players=3,
    min_block=5_000,
    max_block=20_000,
    karmas=("calm", "storm", "drone", "pulse"),
    nuance_lo="pp",
    nuance_hi="ff",
    track_names=("guitar", "synth", "drums"),
    seed=7,
)


def main() -> None:
    score = generate(CONSTRAINTS)
    print(f"generated {len(score.events)} blocks over {score.duration} ms; "
          f"violations: {len(validate(score, CONSTRAINTS))}")

    first = score.events[0]
    sim = run_simulated(["ana", "ben"], [
        ("msg", "ana", protocol.envelope(protocol.EDIT_SCORE, 0, {
            "kind": "SetKarma", "id": first.id, "karma": "storm"})),
        ("msg", "ben", protocol.envelope(protocol.EDIT_SCORE, 1, {
            "kind": "SetNuance", "id": first.id, "nuance": "ff"})),
    ], initial_score=score)
    assert all(r.canonical_score() == sim.server.canonical_score()
               for r in sim.replicas.values())
    print(f"two clients edited block {first.id[:8]}…; replicas converged at "
          f"rev {sim.server.rev}")

    transport = Transport(sim.server.score, speed=10.0)
    log = list(transport.play())
    while transport.playing:
        log.extend(transport.advance(50))
    print(f"played through at speed 10; {len(log)} emissions, for example:")
    for emission in log[:6]:
        msg = osc_for_emission(emission)
        print(f"  {msg.address} {' '.join(str(a) for a in msg.args)}")

    print("final document:")
    print(json.dumps(json.loads(serialize_score(sim.server.score)), indent=2)[:400],
          "…")


if __name__ == "__main__":
    main()

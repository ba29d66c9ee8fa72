/**
 * Loose control: begin/end notifications may be surfaced immediately
 * (mode "auto") or held in a queue until the musician explicitly accepts
 * them (mode "ask"). Gating affects presentation and local relaying only;
 * the replica is never blocked or mutated by it.
 */

import type { EventPayload } from "./protocol.js";

export type GateMode = "auto" | "ask";

export class EventGate {
  mode: GateMode = "auto";
  pending: EventPayload[] = [];
  /** Most recently surfaced begin, feeding the current-karma indicator. */
  currentKarma: string | null = null;
  currentNuance: string | null = null;

  private surfaceHooks: ((event: EventPayload) => void)[] = [];

  onSurface(hook: (event: EventPayload) => void): void {
    this.surfaceHooks.push(hook);
  }

  setMode(mode: GateMode): void {
    this.mode = mode;
  }

  private surface(event: EventPayload): void {
    if (event.kind === "begin" && event.block) {
      this.currentKarma = event.block.props.karma;
      this.currentNuance = event.block.props.nuance;
    }
    for (const hook of this.surfaceHooks) hook(event);
  }

  /** Entry point for every Event broadcast. */
  receive(event: EventPayload): void {
    if (this.mode === "auto") {
      this.surface(event);
    } else {
      this.pending.push(event);
    }
  }

  /** Musician accepts a queued notification: it is surfaced now. */
  accept(index = 0): void {
    const [event] = this.pending.splice(index, 1);
    if (event) this.surface(event);
  }

  /** Musician dismisses a queued notification: discarded, never surfaced. */
  dismiss(index = 0): void {
    this.pending.splice(index, 1);
  }
}

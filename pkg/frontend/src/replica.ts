/**
 * Client-side mirror of the session. Applying every broadcast in order
 * yields a score whose canonical serialization is byte-identical to the
 * server's at the same revision; a gap in the revision stream raises,
 * forcing the caller to reconnect and replace the replica from Welcome.
 */

import type { ServerMessage, TransportSnapshot, ConstraintsDoc } from "./protocol.js";
import { STATE_TYPES } from "./protocol.js";
import { applyEdit, emptyScore, serializeScore, type ScoreDoc } from "./score.js";

export class ReplicaDesync extends Error {}

export class Replica {
  clientId = "";
  rev = -1;
  score: ScoreDoc = emptyScore();
  transport: TransportSnapshot = {
    playing: false, speed: 1, pos: 0, active: [], score_rev: 0,
  };
  constraints: ConstraintsDoc | null = null;
  errors: { code: string; message: string; in_reply_to?: string }[] = [];

  canonicalScore(): string {
    return serializeScore(this.score);
  }

  get synced(): boolean {
    return this.rev >= 0;
  }

  private checkRev(msg: ServerMessage): void {
    if ((STATE_TYPES as readonly string[]).includes(msg.type)) {
      if (msg.rev !== this.rev + 1) {
        throw new ReplicaDesync(
          `${msg.type} carries rev ${msg.rev}, expected ${this.rev + 1}`);
      }
    } else if (msg.rev !== this.rev) {
      throw new ReplicaDesync(
        `${msg.type} stamped rev ${msg.rev}, replica is at ${this.rev}`);
    }
  }

  apply(msg: ServerMessage): void {
    if (msg.type === "Welcome") {
      this.clientId = msg.payload.client;
      this.rev = msg.rev;
      this.score = msg.payload.score;
      this.transport = msg.payload.transport;
      this.constraints = msg.payload.constraints;
      return;
    }
    if (this.rev < 0) throw new ReplicaDesync("broadcast before Welcome");
    this.checkRev(msg);

    switch (msg.type) {
      case "ScoreDelta":
        this.score = applyEdit(this.score, msg.payload.edit);
        this.rev = msg.rev;
        break;
      case "ScoreReplaced":
        this.score = msg.payload.score;
        if (msg.payload.constraints) this.constraints = msg.payload.constraints;
        // generation rewinds and pauses; nothing is sounding
        this.transport = {
          playing: false, speed: this.transport.speed, pos: 0,
          active: [], score_rev: msg.rev,
        };
        this.rev = msg.rev;
        break;
      case "Transport":
        this.transport = msg.payload.transport;
        this.rev = msg.rev;
        break;
      case "Tick":
        this.transport = {
          ...this.transport,
          pos: msg.payload.pos,
          playing: msg.payload.playing,
        };
        break;
      case "Event": {
        const active = new Set(this.transport.active);
        if (msg.payload.kind === "begin" && msg.payload.block) {
          active.add(msg.payload.block.id);
        } else if (msg.payload.kind === "end" && msg.payload.block) {
          active.delete(msg.payload.block.id);
        }
        this.transport = { ...this.transport, active: [...active].sort() };
        break;
      }
      case "Error":
        this.errors.push(msg.payload);
        break;
    }
  }
}

/**
 * Wire protocol envelopes, as documented in docs/protocol.md: one JSON
 * object per frame, {"type", "rev", "payload"}. State broadcasts
 * (ScoreDelta, ScoreReplaced, Transport) advance the revision by exactly
 * one; Tick, Event and Error ride the current revision.
 */

import type { BlockDoc, Edit, ScoreDoc } from "./score.js";

export const STATE_TYPES = ["ScoreDelta", "ScoreReplaced", "Transport"] as const;

export interface TransportSnapshot {
  playing: boolean;
  speed: number;
  pos: number;
  active: string[];
  score_rev: number;
}

export interface ConstraintsDoc {
  total_duration: number;
  min_players: number;
  max_players: number;
  min_block: number;
  max_block: number;
  karmas: string[];
  nuance_lo: string;
  nuance_hi: string;
  track_names: string[];
  seed: number;
}

export interface EventPayload {
  kind: "begin" | "end" | "stopped";
  at: number;
  block?: BlockDoc;
}

export type ServerMessage =
  | { type: "Welcome"; rev: number; payload: {
      client: string; score: ScoreDoc; transport: TransportSnapshot;
      constraints: ConstraintsDoc | null } }
  | { type: "ScoreDelta"; rev: number; payload: { edit: Edit; block?: BlockDoc | null } }
  | { type: "ScoreReplaced"; rev: number; payload: {
      score: ScoreDoc; constraints?: ConstraintsDoc } }
  | { type: "Transport"; rev: number; payload: {
      transport: TransportSnapshot; cmd?: string } }
  | { type: "Tick"; rev: number; payload: { pos: number; playing: boolean } }
  | { type: "Event"; rev: number; payload: EventPayload }
  | { type: "Error"; rev: number; payload: {
      code: string; message: string; in_reply_to?: string } };

export type TransportCommand =
  | { cmd: "play" }
  | { cmd: "pause" }
  | { cmd: "seek"; to: number }
  | { cmd: "speed"; speed: number };

export type ClientMessage =
  | { type: "Hello"; rev: number; payload: { client?: string } }
  | { type: "GenerateScore"; rev: number; payload: ConstraintsDoc }
  | { type: "EditScore"; rev: number; payload: Edit }
  | { type: "Transport"; rev: number; payload: TransportCommand };

export function encodeMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

export function decodeMessage(text: string): ServerMessage {
  const msg = JSON.parse(text) as ServerMessage;
  if (typeof msg !== "object" || msg === null || typeof msg.type !== "string") {
    throw new Error("malformed frame");
  }
  return msg;
}

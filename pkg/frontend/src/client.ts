/**
 * The client session: replica + optimistic editor + event gate + view
 * state, wired to any text channel (a browser WebSocket, a node `ws`
 * socket, or a test double). Reconnecting replaces the replica wholesale
 * from the next Welcome.
 */

import { EventGate } from "./gate.js";
import { OptimisticEditor } from "./optimistic.js";
import {
  decodeMessage,
  encodeMessage,
  type ClientMessage,
  type ConstraintsDoc,
  type ServerMessage,
  type TransportCommand,
} from "./protocol.js";
import { Replica } from "./replica.js";
import type { Edit, ScoreDoc } from "./score.js";
import { ViewState } from "./viewstate.js";

export type SendFn = (text: string) => void;

export class JohnClient {
  replica = new Replica();
  optimistic = new OptimisticEditor();
  gate = new EventGate();
  view = new ViewState();
  /** Every frame handed to the channel, newest last (tests inspect this). */
  sentLog: ClientMessage[] = [];

  private changeHooks: (() => void)[] = [];
  private errorHooks: ((code: string, message: string) => void)[] = [];

  constructor(private readonly send: SendFn) {}

  onChange(hook: () => void): void {
    this.changeHooks.push(hook);
  }

  onError(hook: (code: string, message: string) => void): void {
    this.errorHooks.push(hook);
  }

  private changed(): void {
    for (const hook of this.changeHooks) hook();
  }

  private dispatch(msg: ClientMessage): void {
    this.sentLog.push(msg);
    this.send(encodeMessage(msg));
  }

  hello(preferredId?: string): void {
    this.optimistic.clear();
    this.dispatch({
      type: "Hello",
      rev: 0,
      payload: preferredId ? { client: preferredId } : {},
    });
  }

  sendEdit(edit: Edit): void {
    this.optimistic.push(edit, this.replica.score);
    this.dispatch({ type: "EditScore", rev: this.replica.rev, payload: edit });
    this.changed();
  }

  sendTransport(cmd: TransportCommand): void {
    this.dispatch({ type: "Transport", rev: this.replica.rev, payload: cmd });
  }

  generate(constraints: ConstraintsDoc): void {
    this.dispatch({ type: "GenerateScore", rev: this.replica.rev, payload: constraints });
  }

  /** The score the views draw: replica plus optimistic previews. */
  previewScore(): ScoreDoc {
    return this.optimistic.preview(this.replica.score);
  }

  /** Feed one inbound frame. */
  frame(text: string): void {
    const msg = decodeMessage(text);
    this.handle(msg);
  }

  handle(msg: ServerMessage): void {
    if (msg.type === "Error") {
      this.replica.apply(msg);
      if (msg.payload.in_reply_to === "EditScore") {
        this.optimistic.rollback(); // snap the preview back
      }
      for (const hook of this.errorHooks) {
        hook(msg.payload.code, msg.payload.message);
      }
      this.changed();
      return;
    }
    if (msg.type === "ScoreDelta") {
      this.optimistic.confirm(msg.payload.edit);
    }
    if (msg.type === "ScoreReplaced") {
      this.optimistic.clear();
    }
    this.replica.apply(msg);
    if (msg.type === "Tick") {
      this.view.onTick(msg.payload.pos);
    }
    if (msg.type === "Event") {
      this.gate.receive(msg.payload);
    }
    this.changed();
  }
}

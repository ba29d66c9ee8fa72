/**
 * Optimistic editing: gestures preview instantly on top of the
 * authoritative replica and are reconciled against the server's reply.
 * The server processes one client's edits in order, so replies match
 * pending edits FIFO: a content-matching ScoreDelta confirms the head, an
 * EditScore Error rolls it back.
 */

import type { Edit, ScoreDoc } from "./score.js";
import { applyEdit, EditRejected } from "./score.js";

function sameEdit(sent: Edit, echoed: Edit): boolean {
  if (sent.kind !== echoed.kind) return false;
  if (sent.kind === "AddBlock" && echoed.kind === "AddBlock") {
    // the server assigns the id when the client omitted it
    const a = sent.block;
    const b = echoed.block;
    return (a.id === "" || a.id === b.id) &&
      a.track === b.track && a.start === b.start && a.duration === b.duration &&
      a.props.karma === b.props.karma && a.props.nuance === b.props.nuance;
  }
  return JSON.stringify(sent) === JSON.stringify(echoed);
}

export class OptimisticEditor {
  private pending: Edit[] = [];

  get pendingCount(): number {
    return this.pending.length;
  }

  /** Queue a gesture for preview; returns false if it cannot even apply
   * locally (the caller may still send it and let the server decide). */
  push(edit: Edit, base: ScoreDoc): boolean {
    this.pending.push(edit);
    try {
      applyEdit(base, edit);
      return true;
    } catch (err) {
      if (err instanceof EditRejected) return false;
      throw err;
    }
  }

  /** An authoritative delta arrived (from anyone); drop it from pending if
   * it is the echo of our own head edit. */
  confirm(echoed: Edit): void {
    if (this.pending.length && sameEdit(this.pending[0], echoed)) {
      this.pending.shift();
    }
  }

  /** Our oldest in-flight edit was rejected: roll it back. */
  rollback(): void {
    this.pending.shift();
  }

  clear(): void {
    this.pending = [];
  }

  /** The replica score with every pending edit layered on top; edits that
   * no longer apply (the document moved underneath) preview as no-ops. */
  preview(base: ScoreDoc): ScoreDoc {
    let doc = base;
    for (const edit of this.pending) {
      try {
        doc = applyEdit(doc, edit);
      } catch (err) {
        if (!(err instanceof EditRejected)) throw err;
      }
    }
    return doc;
  }
}

/**
 * Score document model, mirrored from the server.
 *
 * The canonical serialization here must be byte-identical to the server's:
 * fixed key order, events sorted by (start, track, id), compact separators,
 * extra props after karma/nuance with keys sorted recursively. Replica
 * convergence checks compare these exact strings.
 */

export const NUANCES = ["ppp", "pp", "p", "mp", "mf", "f", "ff", "fff"] as const;
export type Nuance = (typeof NUANCES)[number];

export interface BlockProps {
  karma: string;
  nuance: Nuance;
  [extra: string]: unknown;
}

export interface BlockDoc {
  id: string;
  track: number;
  start: number;
  duration: number;
  props: BlockProps;
}

export interface ScoreDoc {
  version: 1;
  tracks: string[];
  duration: number;
  events: BlockDoc[];
}

export type Edit =
  | { kind: "MoveBlock"; id: string; start: number }
  | { kind: "ResizeBlock"; id: string; duration: number }
  | { kind: "SetKarma"; id: string; karma: string }
  | { kind: "SetNuance"; id: string; nuance: Nuance }
  | { kind: "AddBlock"; block: BlockDoc }
  | { kind: "DeleteBlock"; id: string }
  | { kind: "ReplaceScore"; score: ScoreDoc };

export class EditRejected extends Error {}

export function emptyScore(): ScoreDoc {
  return { version: 1, tracks: [], duration: 0, events: [] };
}

export function blockCompare(a: BlockDoc, b: BlockDoc): number {
  return a.start - b.start || a.track - b.track ||
    (a.id < b.id ? -1 : a.id > b.id ? 1 : 0);
}

/** JSON for opaque extra values: object keys sorted, recursively. */
function canonJson(value: unknown): string {
  if (Array.isArray(value)) {
    return "[" + value.map(canonJson).join(",") + "]";
  }
  if (value !== null && typeof value === "object") {
    const obj = value as Record<string, unknown>;
    const body = Object.keys(obj).sort()
      .map((k) => JSON.stringify(k) + ":" + canonJson(obj[k]))
      .join(",");
    return "{" + body + "}";
  }
  return JSON.stringify(value);
}

function serializeBlock(b: BlockDoc): string {
  const { karma, nuance, ...extras } = b.props;
  let props = `{"karma":${JSON.stringify(karma)},"nuance":${JSON.stringify(nuance)}`;
  for (const key of Object.keys(extras).sort()) {
    props += `,${JSON.stringify(key)}:${canonJson(extras[key])}`;
  }
  props += "}";
  return `{"id":${JSON.stringify(b.id)},"track":${b.track},"start":${b.start},` +
    `"duration":${b.duration},"props":${props}}`;
}

/** Canonical bytes; equal strings iff equal scores. */
export function serializeScore(score: ScoreDoc): string {
  const events = [...score.events].sort(blockCompare).map(serializeBlock).join(",");
  return `{"version":${score.version},"tracks":${JSON.stringify(score.tracks)},` +
    `"duration":${score.duration},"events":[${events}]}`;
}

/** Ids of blocks active at time t: start <= t < start + duration. */
export function activeEvents(score: ScoreDoc, t: number): Set<string> {
  const active = new Set<string>();
  for (const b of score.events) {
    if (b.start <= t && t < b.start + b.duration) active.add(b.id);
  }
  return active;
}

export function findBlock(score: ScoreDoc, id: string): BlockDoc | undefined {
  return score.events.find((b) => b.id === id);
}

function checkPlacement(score: ScoreDoc, candidate: BlockDoc): void {
  const end = candidate.start + candidate.duration;
  if (candidate.start < 0 || end > score.duration) {
    throw new EditRejected(`block outside [0, ${score.duration}]`);
  }
  for (const other of score.events) {
    if (other.id === candidate.id || other.track !== candidate.track) continue;
    if (candidate.start < other.start + other.duration && other.start < end) {
      throw new EditRejected(`would overlap ${other.id}`);
    }
  }
}

function replaceBlock(score: ScoreDoc, block: BlockDoc): ScoreDoc {
  return {
    ...score,
    events: score.events.map((b) => (b.id === block.id ? block : b)),
  };
}

/**
 * Pure mirror of the server's edit semantics; throws EditRejected where the
 * server would reply Error. Used for optimistic previews and for applying
 * authoritative deltas to the replica.
 */
export function applyEdit(score: ScoreDoc, edit: Edit): ScoreDoc {
  switch (edit.kind) {
    case "ReplaceScore":
      return edit.score;
    case "AddBlock": {
      const b = edit.block;
      if (!/^[0-9a-f]{32}$/.test(b.id)) throw new EditRejected("bad block id");
      if (findBlock(score, b.id)) throw new EditRejected("id already present");
      if (b.track < 0 || b.track >= score.tracks.length) {
        throw new EditRejected("track out of range");
      }
      if (b.duration < 1) throw new EditRejected("duration must be >= 1");
      checkPlacement(score, b);
      return { ...score, events: [...score.events, b].sort(blockCompare) };
    }
    case "DeleteBlock": {
      if (!findBlock(score, edit.id)) throw new EditRejected("unknown block");
      return { ...score, events: score.events.filter((b) => b.id !== edit.id) };
    }
    case "MoveBlock": {
      const b = findBlock(score, edit.id);
      if (!b) throw new EditRejected("unknown block");
      const moved = { ...b, start: edit.start };
      checkPlacement(score, moved);
      return replaceBlock(score, moved);
    }
    case "ResizeBlock": {
      const b = findBlock(score, edit.id);
      if (!b) throw new EditRejected("unknown block");
      if (edit.duration < 1) throw new EditRejected("duration must be >= 1");
      const resized = { ...b, duration: edit.duration };
      checkPlacement(score, resized);
      return replaceBlock(score, resized);
    }
    case "SetKarma": {
      const b = findBlock(score, edit.id);
      if (!b) throw new EditRejected("unknown block");
      return replaceBlock(score, { ...b, props: { ...b.props, karma: edit.karma } });
    }
    case "SetNuance": {
      const b = findBlock(score, edit.id);
      if (!b) throw new EditRejected("unknown block");
      return replaceBlock(score, { ...b, props: { ...b.props, nuance: edit.nuance } });
    }
  }
}

/**
 * Browser entry point: one screen, no menus during playback. The local
 * view supports drag-to-move and edge-drag-to-resize; the property panel
 * edits karma and nuance; the toolbar drives the shared transport; the
 * gate banner holds notifications in "ask" mode until accepted.
 */

import { JohnClient } from "./client.js";
import { applyEdit, EditRejected, type Edit, type Nuance, NUANCES } from "./score.js";
import { renderGlobal, renderLocal } from "./render.js";
import { MAX_SPAN, MIN_SPAN } from "./viewstate.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const localSvg = byId<HTMLElement>("local-view") as unknown as SVGSVGElement;
const globalSvg = byId<HTMLElement>("global-view") as unknown as SVGSVGElement;
const toast = byId<HTMLDivElement>("toast");
const banner = byId<HTMLDivElement>("gate-banner");
const karmaIndicator = byId<HTMLDivElement>("karma-indicator");
const propPanel = byId<HTMLDivElement>("prop-panel");
const trackToggles = byId<HTMLDivElement>("track-toggles");

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
let socket = new WebSocket(wsUrl);
const client = new JohnClient((text) => socket.send(text));

let selectedId: string | null = null;
let dragPreview: Edit | null = null;

function showToast(text: string): void {
  toast.textContent = text;
  toast.classList.add("visible");
  setTimeout(() => toast.classList.remove("visible"), 2500);
}

client.onError((code, message) => showToast(`${code}: ${message}`));

function drawnScore() {
  let doc = client.previewScore();
  if (dragPreview) {
    try {
      doc = applyEdit(doc, dragPreview);
    } catch (err) {
      if (!(err instanceof EditRejected)) throw err;
    }
  }
  return doc;
}

function redraw(): void {
  const score = drawnScore();
  const playhead = client.replica.transport.pos;
  renderLocal(localSvg, score, client.view, playhead, selectedId);
  renderGlobal(globalSvg, score, client.view, playhead);
  renderTrackToggles(score.tracks);
  renderGateBanner();
  renderKarmaIndicator();
  renderPropPanel();
  byId<HTMLButtonElement>("btn-play").textContent =
    client.replica.transport.playing ? "pause" : "play";
}

client.onChange(redraw);

// --- connection -------------------------------------------------------------

function connect(ws: WebSocket): void {
  ws.onopen = () => client.hello();
  ws.onmessage = (event) => client.frame(String(event.data));
  ws.onclose = () => {
    showToast("connection lost, reconnecting…");
    setTimeout(() => {
      socket = new WebSocket(wsUrl);
      connect(socket); // re-running Hello replaces the replica from Welcome
    }, 1000);
  };
}
connect(socket);

// --- toolbar -----------------------------------------------------------------

byId<HTMLButtonElement>("btn-play").onclick = () => {
  client.sendTransport(
    client.replica.transport.playing ? { cmd: "pause" } : { cmd: "play" });
};

const speedSelect = byId<HTMLSelectElement>("speed");
speedSelect.onchange = () => {
  client.sendTransport({ cmd: "speed", speed: Number(speedSelect.value) });
};

const linkToggle = byId<HTMLInputElement>("link");
linkToggle.onchange = () => {
  client.view.setLink(linkToggle.checked);
  redraw();
};

const spanSlider = byId<HTMLInputElement>("span");
spanSlider.min = String(MIN_SPAN);
spanSlider.max = String(MAX_SPAN);
spanSlider.onchange = () => {
  client.view.setSpan(Number(spanSlider.value));
  redraw();
};

const gateToggle = byId<HTMLInputElement>("gate-ask");
gateToggle.onchange = () => {
  client.gate.setMode(gateToggle.checked ? "ask" : "auto");
  redraw();
};

byId<HTMLButtonElement>("btn-generate").onclick = () => {
  byId<HTMLDivElement>("generate-form").classList.toggle("visible");
};

byId<HTMLButtonElement>("btn-generate-go").onclick = () => {
  const num = (id: string) => Number(byId<HTMLInputElement>(id).value);
  const tracks = byId<HTMLInputElement>("gen-tracks").value
    .split(",").map((t) => t.trim()).filter(Boolean);
  client.generate({
    total_duration: num("gen-duration") * 1000,
    min_players: num("gen-pmin"),
    max_players: num("gen-pmax"),
    min_block: num("gen-dmin") * 1000,
    max_block: num("gen-dmax") * 1000,
    karmas: byId<HTMLInputElement>("gen-karmas").value
      .split(",").map((k) => k.trim()).filter(Boolean),
    nuance_lo: byId<HTMLSelectElement>("gen-nlo").value,
    nuance_hi: byId<HTMLSelectElement>("gen-nhi").value,
    track_names: tracks,
    seed: num("gen-seed"),
  });
  byId<HTMLDivElement>("generate-form").classList.remove("visible");
};

// --- seeking via the global view ----------------------------------------------

globalSvg.addEventListener("pointerdown", (event) => {
  const rect = globalSvg.getBoundingClientRect();
  const fraction = (event.clientX - rect.left) / rect.width;
  const duration = client.replica.score.duration;
  client.sendTransport({
    cmd: "seek",
    to: Math.max(0, Math.min(duration, Math.round(fraction * duration))),
  });
});

// --- local view gestures --------------------------------------------------------

interface DragContext {
  blockId: string;
  mode: "move" | "resize";
  startX: number;
  origStart: number;
  origDuration: number;
}
let drag: DragContext | null = null;

function pxToMs(px: number): number {
  const rect = localSvg.getBoundingClientRect();
  return (px / rect.width) * client.view.span;
}

localSvg.addEventListener("pointerdown", (event) => {
  const target = event.target as Element;
  const resizeId = target.getAttribute("data-resize");
  const group = target.closest("[data-block]");
  const blockId = resizeId ?? group?.getAttribute("data-block") ?? null;
  if (!blockId) {
    selectedId = null;
    redraw();
    return;
  }
  const block = client.previewScore().events.find((b) => b.id === blockId);
  if (!block) return;
  selectedId = blockId;
  drag = {
    blockId,
    mode: resizeId ? "resize" : "move",
    startX: event.clientX,
    origStart: block.start,
    origDuration: block.duration,
  };
  localSvg.setPointerCapture(event.pointerId);
  redraw();
});

localSvg.addEventListener("pointermove", (event) => {
  if (!drag) return;
  const deltaMs = Math.round(pxToMs(event.clientX - drag.startX));
  dragPreview = drag.mode === "move"
    ? { kind: "MoveBlock", id: drag.blockId,
        start: Math.max(0, drag.origStart + deltaMs) }
    : { kind: "ResizeBlock", id: drag.blockId,
        duration: Math.max(1, drag.origDuration + deltaMs) };
  redraw();
});

localSvg.addEventListener("pointerup", () => {
  if (drag && dragPreview) {
    client.sendEdit(dragPreview); // authoritative reply confirms or rolls back
  }
  drag = null;
  dragPreview = null;
  redraw();
});

// --- property panel ---------------------------------------------------------------

function renderPropPanel(): void {
  const block = selectedId
    ? client.previewScore().events.find((b) => b.id === selectedId)
    : undefined;
  propPanel.classList.toggle("visible", Boolean(block));
  if (!block) return;
  const karmaInput = byId<HTMLInputElement>("prop-karma");
  if (document.activeElement !== karmaInput) karmaInput.value = block.props.karma;
  byId<HTMLSelectElement>("prop-nuance").value = block.props.nuance;
}

byId<HTMLInputElement>("prop-karma").onchange = () => {
  if (!selectedId) return;
  client.sendEdit({
    kind: "SetKarma", id: selectedId,
    karma: byId<HTMLInputElement>("prop-karma").value.trim(),
  });
};

const nuanceSelect = byId<HTMLSelectElement>("prop-nuance");
for (const nuance of NUANCES) {
  const option = document.createElement("option");
  option.value = nuance;
  option.textContent = nuance;
  nuanceSelect.appendChild(option);
}
nuanceSelect.onchange = () => {
  if (!selectedId) return;
  client.sendEdit({
    kind: "SetNuance", id: selectedId,
    nuance: nuanceSelect.value as Nuance,
  });
};

byId<HTMLButtonElement>("prop-delete").onclick = () => {
  if (!selectedId) return;
  client.sendEdit({ kind: "DeleteBlock", id: selectedId });
  selectedId = null;
};

// --- track visibility (strictly local) ----------------------------------------------

function renderTrackToggles(tracks: string[]): void {
  if (trackToggles.childElementCount === tracks.length) {
    return; // avoid rebuilding while interacting
  }
  trackToggles.textContent = "";
  tracks.forEach((name, index) => {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = client.view.isTrackVisible(index);
    box.onchange = () => {
      client.view.toggleTrack(index);
      redraw();
    };
    label.appendChild(box);
    label.appendChild(document.createTextNode(name));
    trackToggles.appendChild(label);
  });
}

// --- gating UI -------------------------------------------------------------------

function renderGateBanner(): void {
  const next = client.gate.pending[0];
  banner.classList.toggle("visible", Boolean(next));
  if (!next) return;
  byId<HTMLSpanElement>("gate-text").textContent =
    next.kind === "begin" && next.block
      ? `${next.block.props.karma} · ${next.block.props.nuance} begins`
      : next.kind;
}

byId<HTMLButtonElement>("gate-accept").onclick = () => {
  client.gate.accept();
  redraw();
};
byId<HTMLButtonElement>("gate-dismiss").onclick = () => {
  client.gate.dismiss();
  redraw();
};

function renderKarmaIndicator(): void {
  karmaIndicator.textContent = client.gate.currentKarma
    ? `${client.gate.currentKarma} · ${client.gate.currentNuance}`
    : "—";
}

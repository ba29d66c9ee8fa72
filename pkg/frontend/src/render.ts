/**
 * DOM rendering: the zoomed local view above, the reduced global view
 * below, playhead in red, local-window rectangle in blue. No chrome beyond
 * blocks, playhead and labels; karma and nuance are the block label.
 */

import { globalLayout, karmaColor, localLayout, timeToX } from "./layout.js";
import type { ScoreDoc } from "./score.js";
import type { ViewState } from "./viewstate.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el(name: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function clear(node: SVGElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function renderLocal(
  svg: SVGSVGElement,
  score: ScoreDoc,
  view: ViewState,
  playhead: number,
  selectedId: string | null,
): void {
  clear(svg);
  const width = svg.clientWidth || 800;
  const height = svg.clientHeight || 300;
  const layout = localLayout(score, view, width, height);
  for (const rect of layout.blocks) {
    const group = el("g", {});
    group.setAttribute("data-block", rect.id);
    group.setAttribute("class", "block" + (rect.id === selectedId ? " selected" : ""));
    group.appendChild(el("rect", {
      x: rect.x, y: rect.y + 2, width: rect.width, height: rect.height - 4,
      rx: 3, fill: karmaColor(rect.karma),
    }));
    const label = el("text", {
      x: rect.x + 6, y: rect.y + layout.laneHeight / 2 + 5,
      class: "block-label",
    });
    label.textContent = `${rect.karma} · ${rect.nuance}`;
    group.appendChild(label);
    // resize handle on the right edge
    group.appendChild(el("rect", {
      x: rect.x + rect.width - 6, y: rect.y + 2, width: 6,
      height: rect.height - 4, class: "resize-handle",
      "data-resize": rect.id,
    }));
    svg.appendChild(group);
  }
  const [t0, t1] = view.window;
  if (playhead >= t0 && playhead <= t1) {
    svg.appendChild(el("line", {
      x1: timeToX(playhead, t0, t1, width), y1: 0,
      x2: timeToX(playhead, t0, t1, width), y2: height,
      class: "playhead",
    }));
  }
}

export function renderGlobal(
  svg: SVGSVGElement,
  score: ScoreDoc,
  view: ViewState,
  playhead: number,
): void {
  clear(svg);
  const width = svg.clientWidth || 800;
  const height = svg.clientHeight || 80;
  const layout = globalLayout(score, width, height);
  for (const rect of layout.blocks) {
    svg.appendChild(el("rect", {
      x: rect.x, y: rect.y + 1, width: rect.width,
      height: Math.max(rect.height - 2, 1),
      fill: karmaColor(rect.karma),
    }));
  }
  const t1 = Math.max(score.duration, 1);
  // the local window, draggable in blue
  svg.appendChild(el("rect", {
    x: timeToX(view.windowStart, 0, t1, width), y: 0,
    width: Math.max(
      timeToX(view.windowEnd, 0, t1, width)
      - timeToX(view.windowStart, 0, t1, width), 2),
    height, class: "window-rect",
  }));
  svg.appendChild(el("line", {
    x1: timeToX(playhead, 0, t1, width), y1: 0,
    x2: timeToX(playhead, 0, t1, width), y2: height,
    class: "playhead",
  }));
}

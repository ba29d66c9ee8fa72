import { describe, expect, it } from "vitest";

import { globalLayout, karmaColor, localLayout, timeToX } from "../src/layout.js";
import type { ScoreDoc } from "../src/score.js";
import { ViewState } from "../src/viewstate.js";

const score: ScoreDoc = {
  version: 1,
  tracks: ["a", "b", "c"],
  duration: 120_000,
  events: [
    { id: "1".repeat(32), track: 0, start: 0, duration: 30_000,
      props: { karma: "calm", nuance: "pp" } },
    { id: "2".repeat(32), track: 1, start: 30_000, duration: 30_000,
      props: { karma: "storm", nuance: "ff" } },
    { id: "3".repeat(32), track: 2, start: 90_000, duration: 30_000,
      props: { karma: "drone", nuance: "mf" } },
  ],
};

describe("local layout", () => {
  it("shows only blocks intersecting the window", () => {
    const view = new ViewState();
    view.setSpan(60_000);
    view.panTo(0);
    const layout = localLayout(score, view, 600, 300);
    expect(layout.blocks.map((b) => b.id[0]).sort()).toEqual(["1", "2"]);
  });

  it("hides tracks without rescaling time", () => {
    const view = new ViewState();
    view.setSpan(60_000);
    const before = localLayout(score, view, 600, 300);
    const xBefore = before.blocks.find((b) => b.id[0] === "2")!.x;
    view.toggleTrack(0); // hide track a
    const after = localLayout(score, view, 600, 300);
    expect(after.blocks.map((b) => b.id[0])).toEqual(["2"]);
    const b2 = after.blocks[0];
    expect(b2.x).toBe(xBefore);          // time axis unchanged
    expect(after.lanes.get(1)).toBe(0);  // lanes re-pack vertically
    expect(after.laneHeight).toBe(150);  // 2 visible lanes over 300px
  });

  it("clips blocks straddling the window edge", () => {
    const view = new ViewState();
    view.setSpan(20_000);
    view.panTo(20_000); // window [20s, 40s); block 1 covers [0,30s)
    const layout = localLayout(score, view, 400, 100);
    const clipped = layout.blocks.find((b) => b.id[0] === "1")!;
    expect(clipped.x).toBe(0);
    expect(clipped.width).toBe(timeToX(30_000, 20_000, 40_000, 400));
  });
});

describe("global layout", () => {
  it("lays every track over the whole timeline", () => {
    const layout = globalLayout(score, 1200, 90);
    expect(layout.blocks).toHaveLength(3);
    expect(layout.laneHeight).toBe(30);
    const last = layout.blocks.find((b) => b.id[0] === "3")!;
    expect(last.x).toBe((90_000 / 120_000) * 1200);
  });
});

describe("karma color", () => {
  it("is deterministic and distinguishes labels", () => {
    expect(karmaColor("storm")).toBe(karmaColor("storm"));
    expect(karmaColor("storm")).not.toBe(karmaColor("calm"));
  });
});

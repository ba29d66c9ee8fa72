/**
 * Per-musician view state: the zoomed local window, the link toggle tying
 * it to the shared playhead, and per-track visibility. Strictly local:
 * nothing here ever produces protocol traffic.
 */

export const MIN_SPAN = 10_000;
export const MAX_SPAN = 300_000;
export const DEFAULT_SPAN = 60_000;

/** Where the playhead re-enters the window when the link pans it. */
const LEAD_FRACTION = 0.1;

export class ViewState {
  windowStart = 0;
  span = DEFAULT_SPAN;
  link = true;
  private hiddenTracks = new Set<number>();

  get windowEnd(): number {
    return this.windowStart + this.span;
  }

  get window(): [number, number] {
    return [this.windowStart, this.windowEnd];
  }

  contains(t: number): boolean {
    return this.windowStart <= t && t <= this.windowEnd;
  }

  setSpan(span: number): void {
    this.span = Math.min(MAX_SPAN, Math.max(MIN_SPAN, Math.round(span)));
  }

  panTo(start: number): void {
    this.windowStart = Math.max(0, Math.round(start));
  }

  setLink(on: boolean): void {
    this.link = on;
  }

  toggleTrack(index: number): void {
    if (this.hiddenTracks.has(index)) this.hiddenTracks.delete(index);
    else this.hiddenTracks.add(index);
  }

  isTrackVisible(index: number): boolean {
    return !this.hiddenTracks.has(index);
  }

  visibleTracks(trackCount: number): number[] {
    const out: number[] = [];
    for (let i = 0; i < trackCount; i++) {
      if (this.isTrackVisible(i)) out.push(i);
    }
    return out;
  }

  /**
   * Apply one playhead tick. With link on, the window pans so the playhead
   * stays inside [start, end]; panning scrolls forward putting the playhead
   * near the left edge, or snaps back when it jumped behind the window.
   */
  onTick(playhead: number): void {
    if (!this.link || this.contains(playhead)) return;
    this.windowStart = Math.max(0, Math.round(playhead - this.span * LEAD_FRACTION));
  }
}

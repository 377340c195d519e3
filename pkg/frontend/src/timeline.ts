/** Per-AP sighting timeline: markers, a zoom window, and a drag-marked staying interval. */
import { SightingDoc } from "./types.js";

export interface Marker {
  time: number;
  personaId: string;
  imageRef: string;
}

export interface Selection {
  enter: number;
  exit: number;
}

/** Interval marking snaps to whole seconds. */
export function snapToSecond(t: number): number {
  return Math.round(t);
}

export class TimelineViewModel {
  markers: Marker[] = [];
  /** Current staying-interval selection; always enter < exit when set. */
  selection: Selection | null = null;
  zoom: { start: number; end: number } = { start: 0, end: 1 };
  /** False until the first sightings response lands (distinguishes empty from unloaded). */
  loaded = false;

  private dragAnchor: number | null = null;

  constructor(readonly apId: string) {}

  setMarkers(sightings: SightingDoc[]): void {
    this.markers = sightings
      .map((s) => ({ time: s.timestamp, personaId: s.persona_id, imageRef: s.image_ref }))
      .sort((a, b) => a.time - b.time);
    this.loaded = true;
    if (this.markers.length > 0) {
      this.zoomAll();
    }
  }

  get empty(): boolean {
    return this.loaded && this.markers.length === 0;
  }

  zoomAll(): void {
    if (this.markers.length === 0) return;
    const first = this.markers[0].time;
    const last = this.markers[this.markers.length - 1].time;
    const margin = Math.max(30, (last - first) * 0.05);
    this.zoom = { start: first - margin, end: last + margin };
  }

  zoomTo(start: number, end: number): void {
    if (!(start < end)) {
      throw new Error(`zoom window needs start < end, got [${start}, ${end})`);
    }
    this.zoom = { start, end };
  }

  /** Map a time to a pixel offset within a strip of the given width. */
  timeToX(t: number, width: number): number {
    const span = this.zoom.end - this.zoom.start;
    return ((t - this.zoom.start) / span) * width;
  }

  xToTime(x: number, width: number): number {
    const span = this.zoom.end - this.zoom.start;
    return this.zoom.start + (x / width) * span;
  }

  beginDrag(t: number): void {
    this.dragAnchor = snapToSecond(t);
  }

  dragTo(t: number): void {
    if (this.dragAnchor === null) return;
    const a = this.dragAnchor;
    const b = snapToSecond(t);
    // a zero-length drag is not a valid interval
    this.selection = a === b ? null : { enter: Math.min(a, b), exit: Math.max(a, b) };
  }

  endDrag(t: number): Selection | null {
    this.dragTo(t);
    this.dragAnchor = null;
    return this.selection;
  }

  get dragging(): boolean {
    return this.dragAnchor !== null;
  }

  clearSelection(): void {
    this.selection = null;
    this.dragAnchor = null;
  }

  /** Run is only enabled over well-formed intervals. */
  get selectionValid(): boolean {
    return this.selection !== null && this.selection.enter < this.selection.exit;
  }

  /** Markers within the zoom window, for the card list under the strip. */
  visibleMarkers(): Marker[] {
    return this.markers.filter(
      (m) => m.time >= this.zoom.start && m.time < this.zoom.end);
  }
}

/** Investigator console controller.
 *
 * Workflow: open a log, browse per-AP sighting timelines, drag staying
 * intervals, run the filter on the server, inspect the ranked table, then
 * adjust thresholds and re-run. Mutations ride the investigation's version;
 * a 409 from the service switches the console into a reload-prompt state so
 * concurrent operators never silently clobber each other.
 */
import { ApiClient, ApiError } from "./api.js";
import { renderResultTable } from "./table.js";
import { TimelineViewModel } from "./timeline.js";
import { FilterConfigDoc, ResultTableDoc, StayingIntervalDoc } from "./types.js";

export type Banner =
  | { kind: "none" }
  | { kind: "not-found"; message: string }
  | { kind: "error"; message: string; retry: () => Promise<void> }
  | { kind: "stale"; message: string };

const TIMELINE_WIDTH = 860;
const TIMELINE_HEIGHT = 46;
const MAX_CARDS = 10;

export class InvestigatorConsole {
  logId: string | null = null;
  readonly timelines = new Map<string, TimelineViewModel>();
  investigation: { id: string; version: number } | null = null;
  banner: Banner = { kind: "none" };
  table: ResultTableDoc | null = null;
  /** undefined = keep the server's current config (defaults initially). */
  config: FilterConfigDoc | undefined = undefined;
  running = false;

  private root: HTMLElement | null = null;

  constructor(private readonly api: ApiClient) {}

  async open(logId: string): Promise<void> {
    this.banner = { kind: "none" };
    this.table = null;
    this.timelines.clear();
    this.investigation = null;
    try {
      const aps = await this.api.listAps(logId);
      this.logId = logId;
      for (const ap of aps) {
        this.timelines.set(ap, new TimelineViewModel(ap));
      }
      const inv = await this.api.createInvestigation(logId);
      this.investigation = { id: inv.id, version: inv.version };
    } catch (err) {
      this.banner = this.bannerFor(err, () => this.open(logId));
    }
    this.refresh();
  }

  async loadSightings(ap: string, from?: number, to?: number): Promise<void> {
    const timeline = this.timelines.get(ap);
    if (!timeline || this.logId === null) return;
    try {
      timeline.setMarkers(await this.api.listSightings(this.logId, ap, from, to));
      if (this.banner.kind === "error") {
        this.banner = { kind: "none" };
      }
    } catch (err) {
      this.banner = this.bannerFor(err, () => this.loadSightings(ap, from, to));
    }
    this.refresh();
  }

  markInterval(ap: string, enter: number, exit: number): void {
    const timeline = this.timelines.get(ap);
    if (!timeline) return;
    timeline.beginDrag(enter);
    timeline.endDrag(exit);
    this.refresh();
  }

  intervals(): StayingIntervalDoc[] {
    const out: StayingIntervalDoc[] = [];
    for (const timeline of this.timelines.values()) {
      if (timeline.selectionValid && timeline.selection) {
        out.push({
          ap_id: timeline.apId,
          enter: timeline.selection.enter,
          exit: timeline.selection.exit,
        });
      }
    }
    return out;
  }

  get runEnabled(): boolean {
    return !this.running && this.investigation !== null && this.intervals().length >= 1;
  }

  setConfig(config: FilterConfigDoc | undefined): void {
    this.config = config;
    this.refresh();
  }

  /** The what-if loop: push intervals+config, run server-side, show the table. */
  async runAndShow(): Promise<void> {
    if (!this.runEnabled || !this.investigation) return;
    this.running = true;
    this.refresh();
    try {
      const afterPut = await this.api.putIntervals(
        this.investigation.id, this.investigation.version,
        this.intervals(), this.config);
      this.investigation.version = afterPut.version;
      const run = await this.api.runFilter(this.investigation.id, afterPut.version);
      this.investigation.version = run.version;
      this.table = await this.api.getResult(this.investigation.id);
      this.banner = { kind: "none" };
    } catch (err) {
      if (err instanceof ApiError && err.code === "conflict") {
        this.banner = {
          kind: "stale",
          message: "Another operator changed this investigation. Reload to continue.",
        };
      } else {
        this.banner = this.bannerFor(err, () => this.runAndShow());
      }
    } finally {
      this.running = false;
    }
    this.refresh();
  }

  /** Recover from a stale-version conflict by adopting the server's state. */
  async reload(): Promise<void> {
    if (!this.investigation) return;
    try {
      const inv = await this.api.getInvestigation(this.investigation.id);
      this.investigation.version = inv.version;
      this.table = inv.result;
      this.banner = { kind: "none" };
    } catch (err) {
      this.banner = this.bannerFor(err, () => this.reload());
    }
    this.refresh();
  }

  private bannerFor(err: unknown, retry: () => Promise<void>): Banner {
    if (err instanceof ApiError && err.code === "not_found") {
      return { kind: "not-found", message: `Not found: ${err.message}` };
    }
    const message = err instanceof Error ? err.message : String(err);
    return { kind: "error", message, retry };
  }

  // -- rendering ---------------------------------------------------------

  mount(root: HTMLElement): void {
    this.root = root;
    this.refresh();
  }

  refresh(): void {
    if (this.root) this.render(this.root);
  }

  render(root: HTMLElement): void {
    const doc = root.ownerDocument;
    root.textContent = "";
    root.appendChild(this.renderBanner(doc));
    for (const timeline of this.timelines.values()) {
      root.appendChild(this.renderTimeline(doc, timeline));
    }
    if (this.timelines.size > 0) {
      root.appendChild(this.renderRunBar(doc));
    }
    if (this.table) {
      root.appendChild(renderResultTable(this.table, doc));
    }
  }

  private renderBanner(doc: Document): HTMLElement {
    const el = doc.createElement("div");
    el.className = `banner banner-${this.banner.kind}`;
    if (this.banner.kind === "none") {
      el.hidden = true;
      return el;
    }
    const text = doc.createElement("span");
    text.textContent = this.banner.message;
    el.appendChild(text);
    if (this.banner.kind === "error") {
      const retry = this.banner.retry;
      el.appendChild(this.button(doc, "Retry", "retry-button", () => void retry()));
    } else if (this.banner.kind === "stale") {
      el.appendChild(this.button(doc, "Reload", "reload-button", () => void this.reload()));
    }
    return el;
  }

  private renderTimeline(doc: Document, timeline: TimelineViewModel): HTMLElement {
    const section = doc.createElement("section");
    section.className = "timeline";
    section.dataset.ap = timeline.apId;

    const heading = doc.createElement("h3");
    heading.textContent = timeline.apId;
    section.appendChild(heading);

    if (!timeline.loaded) {
      const hint = doc.createElement("p");
      hint.className = "timeline-unloaded";
      hint.textContent = "No sightings loaded yet.";
      section.appendChild(hint);
      return section;
    }
    if (timeline.empty) {
      const none = doc.createElement("p");
      none.className = "no-sightings";
      none.textContent = "No sightings in this range.";
      section.appendChild(none);
      return section;
    }

    section.appendChild(this.renderStrip(doc, timeline));

    const label = doc.createElement("p");
    label.className = "selection-label";
    if (timeline.selection) {
      label.textContent =
        `staying: [${timeline.selection.enter}, ${timeline.selection.exit}) s`;
      label.appendChild(this.button(doc, "clear", "clear-selection", () => {
        timeline.clearSelection();
        this.refresh();
      }));
    } else {
      label.textContent = "drag on the strip to mark the staying interval";
    }
    section.appendChild(label);

    const cards = doc.createElement("div");
    cards.className = "sighting-cards";
    const visible = timeline.visibleMarkers();
    for (const marker of visible.slice(0, MAX_CARDS)) {
      const card = doc.createElement("span");
      card.className = "sighting-card";
      card.textContent = `${marker.imageRef} @ ${marker.time}s`;
      card.title = marker.personaId;
      cards.appendChild(card);
    }
    if (visible.length > MAX_CARDS) {
      const more = doc.createElement("span");
      more.className = "sighting-more";
      more.textContent = `+${visible.length - MAX_CARDS} more`;
      cards.appendChild(more);
    }
    section.appendChild(cards);
    return section;
  }

  private renderStrip(doc: Document, timeline: TimelineViewModel): SVGSVGElement {
    const SVG = "http://www.w3.org/2000/svg";
    const svg = doc.createElementNS(SVG, "svg") as SVGSVGElement;
    svg.setAttribute("width", String(TIMELINE_WIDTH));
    svg.setAttribute("height", String(TIMELINE_HEIGHT));
    svg.setAttribute("class", "timeline-strip");

    const axis = doc.createElementNS(SVG, "line");
    axis.setAttribute("x1", "0");
    axis.setAttribute("x2", String(TIMELINE_WIDTH));
    axis.setAttribute("y1", String(TIMELINE_HEIGHT - 10));
    axis.setAttribute("y2", String(TIMELINE_HEIGHT - 10));
    axis.setAttribute("class", "axis");
    svg.appendChild(axis);

    if (timeline.selection) {
      const rect = doc.createElementNS(SVG, "rect");
      const x0 = timeline.timeToX(timeline.selection.enter, TIMELINE_WIDTH);
      const x1 = timeline.timeToX(timeline.selection.exit, TIMELINE_WIDTH);
      rect.setAttribute("x", String(Math.min(x0, x1)));
      rect.setAttribute("y", "0");
      rect.setAttribute("width", String(Math.abs(x1 - x0)));
      rect.setAttribute("height", String(TIMELINE_HEIGHT - 10));
      rect.setAttribute("class", "selection");
      svg.appendChild(rect);
    }

    for (const marker of timeline.visibleMarkers()) {
      const tick = doc.createElementNS(SVG, "line");
      const x = timeline.timeToX(marker.time, TIMELINE_WIDTH);
      tick.setAttribute("x1", String(x));
      tick.setAttribute("x2", String(x));
      tick.setAttribute("y1", "8");
      tick.setAttribute("y2", String(TIMELINE_HEIGHT - 10));
      tick.setAttribute("class", "marker");
      svg.appendChild(tick);
    }

    const toTime = (ev: MouseEvent) => {
      const rect = svg.getBoundingClientRect();
      return timeline.xToTime(ev.clientX - rect.left, TIMELINE_WIDTH);
    };
    svg.addEventListener("mousedown", (ev) => {
      timeline.beginDrag(toTime(ev as MouseEvent));
    });
    svg.addEventListener("mousemove", (ev) => {
      if (timeline.dragging) {
        timeline.dragTo(toTime(ev as MouseEvent));
      }
    });
    svg.addEventListener("mouseup", (ev) => {
      if (timeline.dragging) {
        timeline.endDrag(toTime(ev as MouseEvent));
        this.refresh();
      }
    });
    return svg;
  }

  private renderRunBar(doc: Document): HTMLElement {
    const bar = doc.createElement("div");
    bar.className = "run-bar";
    const run = this.button(doc, this.running ? "Running..." : "Run filter",
                            "run-button", () => void this.runAndShow());
    if (!this.runEnabled) {
      run.setAttribute("disabled", "disabled");
    }
    bar.appendChild(run);
    const count = doc.createElement("span");
    count.className = "interval-count";
    count.textContent = `${this.intervals().length} interval(s) marked`;
    bar.appendChild(count);
    return bar;
  }

  private button(doc: Document, label: string, className: string,
                 onClick: () => void): HTMLButtonElement {
    const el = doc.createElement("button");
    el.textContent = label;
    el.className = className;
    el.addEventListener("click", onClick);
    return el;
  }
}

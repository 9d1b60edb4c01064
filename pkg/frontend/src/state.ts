// Sidebar view state. The annotation list is a pure function of the
// records loaded from the server plus the change events applied in seq
// order; revision guards make event application idempotent so optimistic
// updates and their echo events reconcile without flicker.

import type { AnnotationJson, ChangeEventJson } from "./types.js";

export function anchorsOnPage(a: AnnotationJson, pageUrl: string): boolean {
  return a.anchors.some((s) => s.page_url === pageUrl);
}

export class AnnotationSet {
  byId = new Map<string, AnnotationJson>();
  lastSeq = 0;

  constructor(public pageUrl: string) {}

  /** Replace contents from a fresh page query. */
  load(records: AnnotationJson[]): void {
    this.byId.clear();
    for (const record of records) {
      if (!record.deleted) this.byId.set(record.id, record);
    }
  }

  /** Absorb a record returned by a mutation call (optimistic apply). */
  absorb(record: AnnotationJson): void {
    const existing = this.byId.get(record.id);
    if (existing && existing.revision >= record.revision) return;
    if (record.deleted || !anchorsOnPage(record, this.pageUrl)) {
      this.byId.delete(record.id);
    } else {
      this.byId.set(record.id, record);
    }
  }

  /**
   * Apply one change event. Returns true when the visible state changed.
   * Events arrive in seq order per page; duplicates and echoes of
   * optimistic updates are no-ops.
   */
  apply(event: ChangeEventJson): boolean {
    if (event.seq <= this.lastSeq) return false;
    this.lastSeq = event.seq;
    const record = event.annotation;
    const existing = this.byId.get(record.id);
    if (event.kind === "deleted" || record.deleted
        || !anchorsOnPage(record, this.pageUrl)) {
      return this.byId.delete(record.id);
    }
    if (existing && existing.revision >= record.revision) return false;
    this.byId.set(record.id, record);
    return true;
  }

  list(): AnnotationJson[] {
    return [...this.byId.values()];
  }
}

export interface FilterState {
  types: Set<string>;
  tags: string[];
  q: string;
  sort: "document_order" | "time_desc" | "time_asc";
}

export function emptyFilter(): FilterState {
  return { types: new Set(), tags: [], q: "", sort: "document_order" };
}

export function filterIsEmpty(f: FilterState): boolean {
  return f.types.size === 0 && f.tags.length === 0 && !f.q;
}

export interface ViewState {
  pageUrl: string;
  annotations: AnnotationSet;
  expanded: Set<string>;
  filter: FilterState;
  panes: { filter: boolean; pins: boolean };
}

export function newViewState(pageUrl: string): ViewState {
  return {
    pageUrl,
    annotations: new AnnotationSet(pageUrl),
    expanded: new Set(),
    filter: emptyFilter(),
    panes: { filter: false, pins: false },
  };
}

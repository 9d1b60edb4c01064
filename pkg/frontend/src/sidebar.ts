// Sidebar rendering: the annotation list (collapsed cards by default),
// the filter/search pane, the cross-page pin list, and the creation
// editor. Pure DOM construction; every user action is delegated to the
// controller through the actions interface.

import type { AnnotationJson, SelectorJson } from "./types.js";
import type { FilterState } from "./state.js";
import { ANNOTATION_TYPES } from "./types.js";

export interface SidebarActions {
  toggleExpand(id: string): void;
  anchorClick(id: string, anchorIndex: number): void;
  repairAnchor(id: string, anchorIndex: number): void;
  addAnchorFromSelection(id: string): void;
  submitReply(id: string, body: string): void;
  editBody(id: string, body: string): void;
  deleteAnnotation(id: string): void;
  answer(id: string, text: string): void;
  dismiss(id: string): void;
  complete(id: string): void;
  setPinned(id: string, flag: boolean): void;
  report(id: string): void;
  applyFilter(): void;
  toggleFilterPane(): void;
  togglePinPane(): void;
}

const PREVIEW_CHARS = 90;
const ANSWER_SEPARATOR = "\n\n[Answer] ";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function button(label: string, className: string,
                onClick: () => void): HTMLButtonElement {
  const b = el("button", className, label);
  b.type = "button";
  b.addEventListener("click", (event) => {
    event.stopPropagation();
    onClick();
  });
  return b;
}

export class Sidebar {
  listEl: HTMLElement;
  filterPane: HTMLElement;
  pinPane: HTMLElement;
  noticeEl: HTMLElement;
  countEl: HTMLElement;

  constructor(public container: HTMLElement, private actions: SidebarActions,
              private currentUser: () => string | null) {
    const toolbar = el("div", "sidebar-toolbar");
    this.countEl = el("span", "annotation-count", "0 annotations");
    toolbar.appendChild(this.countEl);
    toolbar.appendChild(button("filter & search", "toolbar-button filter-toggle",
      () => this.actions.toggleFilterPane()));
    toolbar.appendChild(button("pinned", "toolbar-button pin-list-toggle",
      () => this.actions.togglePinPane()));
    container.appendChild(toolbar);

    this.noticeEl = el("div", "notice");
    this.noticeEl.hidden = true;
    container.appendChild(this.noticeEl);

    this.filterPane = el("div", "filter-pane");
    this.filterPane.hidden = true;
    this.buildFilterPane();
    container.appendChild(this.filterPane);

    this.pinPane = el("div", "pin-pane");
    this.pinPane.hidden = true;
    container.appendChild(this.pinPane);

    this.listEl = el("div", "annotation-list");
    container.appendChild(this.listEl);
  }

  private buildFilterPane(): void {
    const types = el("div", "filter-types");
    for (const type of ANNOTATION_TYPES) {
      const label = el("label", "filter-type");
      const box = el("input") as HTMLInputElement;
      box.type = "checkbox";
      box.value = type;
      box.addEventListener("change", () => this.actions.applyFilter());
      label.appendChild(box);
      label.appendChild(document.createTextNode(type));
      types.appendChild(label);
    }
    this.filterPane.appendChild(types);

    const search = el("input", "filter-search") as HTMLInputElement;
    search.placeholder = "search text, quotes, tags";
    search.addEventListener("change", () => this.actions.applyFilter());
    this.filterPane.appendChild(search);

    const tags = el("input", "filter-tags") as HTMLInputElement;
    tags.placeholder = "tags (comma separated)";
    tags.addEventListener("change", () => this.actions.applyFilter());
    this.filterPane.appendChild(tags);

    const sort = el("select", "filter-sort") as HTMLSelectElement;
    for (const [value, label] of [
      ["document_order", "sort: location on page"],
      ["time_desc", "sort: newest first"],
      ["time_asc", "sort: oldest first"],
    ]) {
      const option = el("option", undefined, label) as HTMLOptionElement;
      option.value = value;
      sort.appendChild(option);
    }
    sort.addEventListener("change", () => this.actions.applyFilter());
    this.filterPane.appendChild(sort);
  }

  readFilter(): FilterState {
    const types = new Set<string>();
    this.filterPane.querySelectorAll<HTMLInputElement>(
      ".filter-type input:checked").forEach((box) => types.add(box.value));
    const q = this.filterPane.querySelector<HTMLInputElement>(
      ".filter-search")!.value.trim();
    const tags = this.filterPane.querySelector<HTMLInputElement>(
      ".filter-tags")!.value.split(",").map((t) => t.trim()).filter(Boolean);
    const sort = this.filterPane.querySelector<HTMLSelectElement>(
      ".filter-sort")!.value as FilterState["sort"];
    return { types, tags, q, sort };
  }

  showNotice(message: string): void {
    this.noticeEl.textContent = message;
    this.noticeEl.hidden = false;
    setTimeout(() => { this.noticeEl.hidden = true; }, 4000);
  }

  renderList(annotations: AnnotationJson[], expanded: Set<string>,
             pageUrl: string): void {
    this.countEl.textContent = `${annotations.length} annotation(s)`;
    this.listEl.textContent = "";
    for (const record of annotations) {
      this.listEl.appendChild(this.card(record, expanded.has(record.id), pageUrl));
    }
  }

  renderPins(annotations: AnnotationJson[]): void {
    this.pinPane.textContent = "";
    this.pinPane.appendChild(el("h3", "pin-title",
      `pinned (${annotations.length})`));
    for (const record of annotations) {
      const row = el("div", "pin-row");
      row.dataset.id = record.id;
      row.appendChild(el("span", `type-badge type-${record.type}`, record.type));
      row.appendChild(el("span", "pin-preview",
        record.body.slice(0, PREVIEW_CHARS) || record.anchors[0]?.quote || ""));
      row.appendChild(button("go", "pin-go",
        () => this.actions.anchorClick(record.id, 0)));
      row.appendChild(button("unpin", "pin-remove",
        () => this.actions.setPinned(record.id, false)));
      this.pinPane.appendChild(row);
    }
  }

  scrollToCard(id: string): void {
    const card = this.listEl.querySelector<HTMLElement>(
      `.annotation-card[data-id="${id}"]`);
    card?.scrollIntoView?.({ block: "nearest" });
  }

  private card(record: AnnotationJson, expanded: boolean,
               pageUrl: string): HTMLElement {
    const card = el("div",
      `annotation-card ${expanded ? "expanded" : "collapsed"} type-${record.type}`);
    card.dataset.id = record.id;
    card.addEventListener("click", () => this.actions.toggleExpand(record.id));

    const head = el("div", "card-head");
    head.appendChild(el("span", `type-badge type-${record.type}`, record.type));
    head.appendChild(el("span", "card-author", record.author));
    if (record.state && "kind" in record.state) {
      head.appendChild(el("span", `state-badge state-${record.state.kind}`,
        record.state.kind.replace("_", " ")));
    }
    head.appendChild(el("span", "card-date",
      record.created_at.slice(0, 10)));
    card.appendChild(head);

    if (!expanded) {
      const preview = record.body || record.anchors[0]?.quote || "(highlight)";
      card.appendChild(el("div", "card-preview",
        preview.slice(0, PREVIEW_CHARS)));
      return card;
    }

    card.appendChild(this.bodyBlock(record));
    card.appendChild(this.anchorChips(record, pageUrl));
    if (record.tags.length) {
      const tags = el("div", "card-tags");
      for (const tag of record.tags) tags.appendChild(el("span", "tag", tag));
      card.appendChild(tags);
    }
    card.appendChild(this.repliesBlock(record));
    card.appendChild(this.controls(record));
    return card;
  }

  private bodyBlock(record: AnnotationJson): HTMLElement {
    const wrap = el("div", "card-body");
    const separatorAt = record.body.indexOf(ANSWER_SEPARATOR);
    if (record.type === "question" && separatorAt !== -1) {
      wrap.appendChild(el("div", "body-text",
        record.body.slice(0, separatorAt)));
      wrap.appendChild(el("div", "answer-block",
        "[Answer] " + record.body.slice(separatorAt + ANSWER_SEPARATOR.length)));
    } else {
      wrap.appendChild(el("div", "body-text", record.body));
    }
    return wrap;
  }

  private anchorChips(record: AnnotationJson, pageUrl: string): HTMLElement {
    const wrap = el("div", "card-anchors");
    record.anchors.forEach((anchor: SelectorJson, index: number) => {
      const chip = el("span",
        `anchor-chip${anchor.broken ? " broken" : ""}` +
        `${anchor.page_url === pageUrl ? "" : " off-page"}`);
      chip.appendChild(button(
        `⚓ ${anchor.quote.slice(0, 30)}${anchor.page_url === pageUrl ? "" : " ↗"}`,
        "anchor-go", () => this.actions.anchorClick(record.id, index)));
      if (anchor.broken) {
        chip.appendChild(el("span", "broken-badge", "broken"));
        chip.appendChild(button("re-attach from selection", "anchor-repair",
          () => this.actions.repairAnchor(record.id, index)));
      }
      wrap.appendChild(chip);
    });
    if (this.currentUser() === record.author) {
      wrap.appendChild(button("+ anchor from selection", "anchor-add",
        () => this.actions.addAnchorFromSelection(record.id)));
    }
    return wrap;
  }

  private repliesBlock(record: AnnotationJson): HTMLElement {
    const wrap = el("div", "card-replies");
    for (const reply of record.replies) {
      const row = el("div", "reply");
      row.appendChild(el("span", "reply-author", reply.author));
      row.appendChild(el("span", "reply-body", reply.body));
      wrap.appendChild(row);
    }
    const input = el("input", "reply-input") as HTMLInputElement;
    input.placeholder = "reply…";
    input.addEventListener("click", (event) => event.stopPropagation());
    input.addEventListener("keydown", (event) => {
      if (event.key === "Enter" && input.value.trim()) {
        this.actions.submitReply(record.id, input.value.trim());
        input.value = "";
      }
    });
    wrap.appendChild(input);
    return wrap;
  }

  private controls(record: AnnotationJson): HTMLElement {
    const wrap = el("div", "card-controls");
    const mine = this.currentUser() === record.author;

    wrap.appendChild(button(record.pinned && mine ? "unpin" : "pin",
      "control-pin", () => this.actions.setPinned(record.id,
        !(mine && record.pinned))));

    if (record.type === "question" && mine
        && record.state && record.state.kind === "unanswered") {
      wrap.appendChild(button("answer", "control-answer", () => {
        const text = window.prompt("Answer:");
        if (text) this.actions.answer(record.id, text);
      }));
      wrap.appendChild(button("not relevant", "control-dismiss",
        () => this.actions.dismiss(record.id)));
    }
    if (record.type === "todo" && mine
        && record.state && record.state.kind === "open") {
      wrap.appendChild(button("complete", "control-complete",
        () => this.actions.complete(record.id)));
    }
    if (record.type === "issue") {
      wrap.appendChild(button("report to maintainers", "control-report",
        () => this.actions.report(record.id)));
    }
    if (mine) {
      wrap.appendChild(button("edit", "control-edit", () => {
        const body = window.prompt("Edit body:", record.body);
        if (body !== null) this.actions.editBody(record.id, body);
      }));
      wrap.appendChild(button("delete", "control-delete",
        () => this.actions.deleteAnnotation(record.id)));
    }
    return wrap;
  }
}

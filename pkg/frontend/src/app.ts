// Controller: wires the API client, the viewer pane, the sidebar, the
// selection popup, and the live event stream into one view. UI state is
// a pure function of server records plus the selection; optimistic
// updates absorb the mutation responses and the event stream reconciles
// everything else.

import { ApiClient, ApiError } from "./api.js";
import { SelectionPopup } from "./popup.js";
import { Sidebar } from "./sidebar.js";
import { EventStream } from "./sse.js";
import type { SSEFrame } from "./sse.js";
import { filterIsEmpty, newViewState } from "./state.js";
import type { ViewState } from "./state.js";
import { Viewer } from "./viewer.js";
import type { SelectionInfo } from "./viewer.js";
import type {
  AnnotationDraft,
  AnnotationJson,
  AnnotationType,
  ChangeEventJson,
  SelectorJson,
} from "./types.js";

export interface AppElements {
  viewer: HTMLElement;
  sidebar: HTMLElement;
  popupParent: HTMLElement;
}

export class App {
  state: ViewState;
  viewer: Viewer;
  sidebar: Sidebar;
  popup: SelectionPopup;
  stream: EventStream | null = null;
  editorEl: HTMLElement;
  private pinCache: AnnotationJson[] = [];

  constructor(public api: ApiClient, elements: AppElements) {
    this.state = newViewState("");
    this.viewer = new Viewer(elements.viewer);
    this.sidebar = new Sidebar(elements.sidebar, this.actions(),
      () => this.api.user);
    this.popup = new SelectionPopup(elements.popupParent,
      (type, info, prompt) => this.openEditor(type, info, prompt));
    this.editorEl = document.createElement("div");
    this.editorEl.className = "creation-editor";
    this.editorEl.hidden = true;
    elements.sidebar.insertBefore(this.editorEl, this.sidebar.listEl);

    this.viewer.onHighlightClick((id) => {
      this.state.expanded.add(id);
      this.render();
      this.sidebar.scrollToCard(id);
    });
    elements.viewer.addEventListener("mouseup", () => {
      setTimeout(() => this.openPopupFromSelection(), 0);
    });
  }

  // -- page lifecycle ----------------------------------------------------

  async loadPage(url: string): Promise<void> {
    this.stream?.close();
    this.state = newViewState(url);
    try {
      const tree = await this.api.documentTree(url);
      this.viewer.render(tree.root);
    } catch (error) {
      if (error instanceof ApiError && error.code === "no-snapshot") {
        this.viewer.renderPlaceholder(
          "No stored snapshot for this page; annotations are listed without highlights.");
      } else {
        throw error;
      }
    }
    await this.refreshList();
    this.stream = new EventStream(
      this.api.eventsUrl(url), this.api.user,
      (frame) => this.onFrame(frame),
      () => undefined);
    await this.stream.start();
  }

  async refreshList(): Promise<void> {
    const f = this.state.filter;
    const records = await this.api.listAnnotations({
      url: this.state.pageUrl,
      scope: "page",
      types: [...f.types],
      tags: f.tags,
      q: f.q || undefined,
      sort: f.q && filterIsEmpty(f) ? undefined : f.sort,
    });
    this.state.annotations.load(records);
    this.render();
    this.paint();
  }

  render(): void {
    this.sidebar.renderList(this.state.annotations.list(),
      this.state.expanded, this.state.pageUrl);
  }

  paint(): void {
    this.viewer.clearHighlights();
    for (const record of this.state.annotations.list()) {
      record.anchors.forEach((anchor, index) => {
        if (anchor.page_url === this.state.pageUrl) {
          this.viewer.highlight(record.id, anchor, index);
        }
      });
    }
  }

  private onFrame(frame: SSEFrame): void {
    if (frame.event === "error") {
      this.sidebar.showNotice("event stream dropped; reload to resubscribe");
      return;
    }
    const event = JSON.parse(frame.data) as ChangeEventJson;
    if (this.state.annotations.apply(event)) {
      this.render();
      this.paint();
      if (!this.sidebar.pinPane.hidden) void this.refreshPins();
    }
  }

  private absorb(record: AnnotationJson): void {
    this.state.annotations.absorb(record);
    this.render();
    this.paint();
  }

  // -- selection & creation ------------------------------------------------

  openPopupFromSelection(x = 0, y = 0): boolean {
    const info = this.viewer.currentSelection();
    if (!info) {
      this.popup.hide();
      return false;
    }
    this.popup.show(info, x, y);
    return true;
  }

  openEditor(type: AnnotationType, info: SelectionInfo, promptBody?: string): void {
    this.editorEl.textContent = "";
    this.editorEl.hidden = false;

    const heading = document.createElement("div");
    heading.className = "editor-heading";
    heading.textContent = `new ${type}`;
    this.editorEl.appendChild(heading);

    const anchorPreview = document.createElement("div");
    anchorPreview.className = "editor-anchor";
    anchorPreview.textContent = `⚓ “${info.quote.slice(0, 60)}”`;
    this.editorEl.appendChild(anchorPreview);

    const body = document.createElement("textarea");
    body.className = "editor-body";
    body.value = promptBody ?? "";
    body.hidden = type === "highlight";
    this.editorEl.appendChild(body);

    const tags = document.createElement("input");
    tags.className = "editor-tags";
    tags.placeholder = "tags (comma separated)";
    this.editorEl.appendChild(tags);

    const visibility = document.createElement("select");
    visibility.className = "editor-visibility";
    for (const option of ["public", "private"]) {
      const el = document.createElement("option");
      el.value = option;
      el.textContent = option;
      visibility.appendChild(el);
    }
    this.editorEl.appendChild(visibility);

    const publish = document.createElement("button");
    publish.type = "button";
    publish.className = "editor-publish";
    publish.textContent = "publish";
    publish.addEventListener("click", () => {
      void this.publish({
        type,
        body: type === "highlight" ? "" : body.value,
        anchors: [this.selectorFrom(info)],
        tags: tags.value.split(",").map((t) => t.trim()).filter(Boolean),
        visibility: visibility.value as "public" | "private",
      });
    });
    this.editorEl.appendChild(publish);

    const cancel = document.createElement("button");
    cancel.type = "button";
    cancel.className = "editor-cancel";
    cancel.textContent = "cancel";
    cancel.addEventListener("click", () => { this.editorEl.hidden = true; });
    this.editorEl.appendChild(cancel);
  }

  selectorFrom(info: SelectionInfo): SelectorJson {
    const element = this.viewer.resolvePath(info.path);
    const total = element ? this.viewer.elementText(element).length : 0;
    return {
      page_url: this.state.pageUrl,
      path: info.path,
      quote: info.quote,
      start_offset: info.start,
      end_offset: total - info.start - info.quote.length,
    };
  }

  async publish(draft: AnnotationDraft): Promise<AnnotationJson | null> {
    try {
      const record = await this.api.createAnnotation(draft);
      this.editorEl.hidden = true;
      this.absorb(record);
      return record;
    } catch (error) {
      this.surface(error);
      return null;
    }
  }

  // -- actions from the sidebar ------------------------------------------------

  private actions() {
    return {
      toggleExpand: (id: string) => {
        if (this.state.expanded.has(id)) this.state.expanded.delete(id);
        else this.state.expanded.add(id);
        this.render();
      },
      anchorClick: (id: string, anchorIndex: number) =>
        void this.goToAnchor(id, anchorIndex),
      repairAnchor: (id: string, anchorIndex: number) =>
        void this.repairAnchor(id, anchorIndex),
      addAnchorFromSelection: (id: string) =>
        void this.addAnchorFromSelection(id),
      submitReply: (id: string, body: string) =>
        void this.mutate(() => this.api.reply(id, body)),
      editBody: (id: string, body: string) => void this.editBody(id, body),
      deleteAnnotation: (id: string) =>
        void this.mutate(() => this.api.deleteAnnotation(id)),
      answer: (id: string, text: string) =>
        void this.mutate(() => this.api.answer(id, text)),
      dismiss: (id: string) => void this.mutate(() => this.api.dismiss(id)),
      complete: (id: string) => void this.mutate(() => this.api.complete(id)),
      setPinned: (id: string, flag: boolean) => void this.setPinned(id, flag),
      report: (id: string) => void this.report(id),
      applyFilter: () => {
        this.state.filter = this.sidebar.readFilter();
        void this.refreshList();
      },
      toggleFilterPane: () => {
        this.sidebar.filterPane.hidden = !this.sidebar.filterPane.hidden;
      },
      togglePinPane: () => void this.togglePinPane(),
    };
  }

  async mutate(call: () => Promise<AnnotationJson>): Promise<AnnotationJson | null> {
    try {
      const record = await call();
      this.absorb(record);
      if (!this.sidebar.pinPane.hidden) await this.refreshPins();
      return record;
    } catch (error) {
      this.surface(error);
      return null;
    }
  }

  private async editBody(id: string, body: string): Promise<void> {
    const record = this.state.annotations.byId.get(id);
    if (!record) return;
    await this.mutate(() =>
      this.api.patchAnnotation(id, record.revision, { body }));
  }

  async goToAnchor(id: string, anchorIndex: number): Promise<void> {
    const record = this.state.annotations.byId.get(id)
      ?? this.pinCache.find((a) => a.id === id);
    const anchor = record?.anchors[anchorIndex];
    if (!record || !anchor) return;
    if (anchor.page_url !== this.state.pageUrl) {
      await this.loadPage(anchor.page_url);
    }
    this.viewer.scrollToAnnotation(id, anchorIndex);
  }

  private async repairAnchor(id: string, anchorIndex: number): Promise<void> {
    const info = this.viewer.currentSelection();
    const record = this.state.annotations.byId.get(id);
    if (!record) return;
    if (!info || info.spansElements) {
      this.sidebar.showNotice(
        "select replacement text within one element first");
      return;
    }
    const anchors = record.anchors.slice();
    anchors[anchorIndex] = this.selectorFrom(info);
    await this.mutate(() =>
      this.api.patchAnnotation(id, record.revision, { anchors }));
  }

  private async addAnchorFromSelection(id: string): Promise<void> {
    const info = this.viewer.currentSelection();
    const record = this.state.annotations.byId.get(id);
    if (!record) return;
    if (!info || info.spansElements) {
      this.sidebar.showNotice("select text within one element first");
      return;
    }
    const anchors = [...record.anchors, this.selectorFrom(info)];
    await this.mutate(() =>
      this.api.patchAnnotation(id, record.revision, { anchors }));
  }

  async setPinned(id: string, flag: boolean): Promise<void> {
    try {
      const record = flag ? await this.api.pin(id) : await this.api.unpin(id);
      this.absorb(record);
      if (!this.sidebar.pinPane.hidden) await this.refreshPins();
    } catch (error) {
      this.surface(error);
    }
  }

  async togglePinPane(): Promise<void> {
    const pane = this.sidebar.pinPane;
    pane.hidden = !pane.hidden;
    if (!pane.hidden) await this.refreshPins();
  }

  async refreshPins(): Promise<void> {
    this.pinCache = await this.api.pinList();
    this.sidebar.renderPins(this.pinCache);
  }

  private async report(id: string): Promise<void> {
    try {
      const report = await this.api.issueReport(id);
      this.offerDownload(`issue-report-${id}.json`,
        JSON.stringify(report, null, 2));
      this.sidebar.showNotice("issue report ready");
    } catch (error) {
      this.surface(error);
    }
  }

  private offerDownload(filename: string, content: string): void {
    try {
      const url = URL.createObjectURL(
        new Blob([content], { type: "application/json" }));
      const link = document.createElement("a");
      link.href = url;
      link.download = filename;
      link.click();
      URL.revokeObjectURL(url);
    } catch {
      console.log(content); // environment without object URLs
    }
  }

  /** 403/409 become inline notices and the view refetches server state. */
  private surface(error: unknown): void {
    if (error instanceof ApiError) {
      this.sidebar.showNotice(`${error.code}: ${error.message}`);
      if (error.status === 409 || error.status === 403) {
        void this.refreshList();
      }
      return;
    }
    throw error;
  }

  close(): void {
    this.stream?.close();
  }
}

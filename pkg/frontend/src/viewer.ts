// Documentation viewer pane. Renders the server's parsed snapshot tree
// 1:1 into real DOM (createElement, never innerHTML) so node paths
// resolve identically on both sides, paints highlight overlays for
// resolvable anchors, and turns user text selections back into
// (path, offset, quote) triples.

import type { SelectorJson, TreeChild, TreeNodeJson } from "./types.js";

export const HIGHLIGHT_CLASS = "adamant-highlight";
const ANNOTATION_ATTR = "data-annotation-id";

export interface SelectionInfo {
  path: string;
  start: number;
  quote: string;
  spansElements: boolean;
}

export function parsePath(path: string): [string, number][] {
  const segments: [string, number][] = [];
  const re = /\/([a-z][a-z0-9-]*)\[(\d+)\]/g;
  let consumed = 0;
  let match: RegExpExecArray | null;
  while ((match = re.exec(path)) !== null) {
    if (match.index !== consumed) return [];
    segments.push([match[1], parseInt(match[2], 10)]);
    consumed = re.lastIndex;
  }
  return consumed === path.length && segments.length ? segments : [];
}

export function buildPath(root: Element, target: Element): string {
  const parts: string[] = [];
  let node: Element = target;
  for (;;) {
    if (node === root) {
      parts.unshift(`/${node.tagName.toLowerCase()}[1]`);
      break;
    }
    const parent = node.parentElement;
    if (!parent) return "";
    let nth = 0;
    for (const sibling of Array.from(parent.children)) {
      if (sibling.tagName === node.tagName) {
        nth += 1;
        if (sibling === node) break;
      }
    }
    parts.unshift(`/${node.tagName.toLowerCase()}[${nth}]`);
    node = parent;
  }
  return parts.join("");
}

export class Viewer {
  root: Element | null = null;
  private highlightHandler: ((id: string) => void) | null = null;

  constructor(public container: HTMLElement) {}

  render(tree: TreeNodeJson): void {
    this.container.textContent = "";
    this.root = this.buildNode(tree);
    this.container.appendChild(this.root);
  }

  renderPlaceholder(message: string): void {
    this.container.textContent = "";
    const note = document.createElement("p");
    note.className = "viewer-placeholder";
    note.textContent = message;
    this.container.appendChild(note);
    this.root = null;
  }

  private buildNode(node: TreeNodeJson): Element {
    const el = document.createElement(node.tag);
    for (const child of node.children) {
      if ("text" in child) {
        el.appendChild(document.createTextNode(child.text));
      } else {
        el.appendChild(this.buildNode(child as TreeNodeJson));
      }
    }
    return el;
  }

  onHighlightClick(handler: (id: string) => void): void {
    this.highlightHandler = handler;
    this.container.addEventListener("click", (event) => {
      const mark = (event.target as Element).closest?.(`[${ANNOTATION_ATTR}]`);
      if (mark && this.highlightHandler) {
        this.highlightHandler(mark.getAttribute(ANNOTATION_ATTR)!);
      }
    });
  }

  resolvePath(path: string): Element | null {
    if (!this.root) return null;
    const segments = parsePath(path);
    if (!segments.length) return null;
    const [rootTag, rootIndex] = segments[0];
    if (this.root.tagName.toLowerCase() !== rootTag || rootIndex !== 1) return null;
    let node: Element = this.root;
    for (const [tag, index] of segments.slice(1)) {
      let nth = 0;
      let found: Element | null = null;
      for (const child of Array.from(node.children)) {
        if (child.tagName.toLowerCase() === tag) {
          nth += 1;
          if (nth === index) {
            found = child;
            break;
          }
        }
      }
      if (!found) return null;
      node = found;
    }
    return node;
  }

  /** Descendant text nodes in document order. */
  private textNodes(el: Element): Text[] {
    const out: Text[] = [];
    const walk = (node: Node) => {
      for (const child of Array.from(node.childNodes)) {
        if (child.nodeType === 3) out.push(child as Text);
        else if (child.nodeType === 1) walk(child);
      }
    };
    walk(el);
    return out;
  }

  elementText(el: Element): string {
    return this.textNodes(el).map((t) => t.data).join("");
  }

  /**
   * Paint one anchor. Only consistent, resolvable selectors produce a
   * highlight (never a guess): the path must resolve and the dual
   * offsets must exactly frame the quote in the element's current text.
   */
  highlight(annotationId: string, selector: SelectorJson,
            anchorIndex = 0): HTMLElement | null {
    if (selector.broken) return null;
    const el = this.resolvePath(selector.path);
    if (!el) return null;
    const text = this.elementText(el);
    const start = selector.start_offset;
    const end = text.length - selector.end_offset;
    if (start < 0 || end > text.length || end - start !== selector.quote.length
        || text.slice(start, end) !== selector.quote) {
      return null;
    }
    let first: HTMLElement | null = null;
    let cursor = 0;
    for (const textNode of this.textNodes(el)) {
      const nodeStart = cursor;
      const nodeEnd = cursor + textNode.data.length;
      cursor = nodeEnd;
      const from = Math.max(start, nodeStart);
      const to = Math.min(end, nodeEnd);
      if (from >= to) continue;
      // overlapping anchors nest marks; the text walk is unaffected
      let piece = textNode;
      if (from > nodeStart) piece = piece.splitText(from - nodeStart);
      if (to < nodeEnd) piece.splitText(to - from);
      const mark = document.createElement("mark");
      mark.className = HIGHLIGHT_CLASS;
      mark.setAttribute(ANNOTATION_ATTR, annotationId);
      mark.setAttribute("data-anchor-index", String(anchorIndex));
      piece.parentNode!.replaceChild(mark, piece);
      mark.appendChild(piece);
      first = first ?? mark;
    }
    return first;
  }

  clearHighlights(): void {
    if (!this.root) return;
    for (const mark of Array.from(
        this.root.querySelectorAll(`[${ANNOTATION_ATTR}]`))) {
      const parent = mark.parentNode!;
      while (mark.firstChild) parent.insertBefore(mark.firstChild, mark);
      parent.removeChild(mark);
      parent.normalize();
    }
  }

  marksFor(annotationId: string): HTMLElement[] {
    if (!this.root) return [];
    return Array.from(this.root.querySelectorAll(
      `[${ANNOTATION_ATTR}="${annotationId}"]`)) as HTMLElement[];
  }

  /** Scroll a highlight of the annotation into view (a specific anchor's
   * mark when an index is given, else the first). */
  scrollToAnnotation(annotationId: string, anchorIndex?: number): boolean {
    const marks = this.marksFor(annotationId);
    const mark = anchorIndex === undefined
      ? marks[0]
      : marks.find((m) => m.getAttribute("data-anchor-index")
          === String(anchorIndex)) ?? marks[0];
    if (!mark) return false;
    mark.scrollIntoView?.({ block: "center" });
    return true;
  }

  /** Offset of a point (text node, offset) within the element's text. */
  private offsetWithin(el: Element, node: Text, offset: number): number {
    let cursor = 0;
    for (const textNode of this.textNodes(el)) {
      if (textNode === node) return cursor + offset;
      cursor += textNode.data.length;
    }
    return -1;
  }

  private nearestElement(node: Node): Element | null {
    return node.nodeType === 1 ? node as Element : node.parentElement;
  }

  /**
   * Turn a DOM range into selector coordinates. The owning element is
   * the deepest element containing the whole range; a selection whose
   * endpoints live in different elements is flagged so the popup can
   * steer the user to the multi-anchor path.
   */
  selectionFromRange(range: {
    startContainer: Node; startOffset: number;
    endContainer: Node; endOffset: number;
    commonAncestorContainer: Node;
  }): SelectionInfo | null {
    if (!this.root) return null;
    const startText = range.startContainer;
    const endText = range.endContainer;
    if (startText.nodeType !== 3 || endText.nodeType !== 3) return null;
    let owner = this.nearestElement(range.commonAncestorContainer);
    while (owner && owner.hasAttribute(ANNOTATION_ATTR)) {
      owner = owner.parentElement; // anchor to content, not to a mark
    }
    if (!owner || !this.root.contains(owner)) return null;
    const start = this.offsetWithin(owner, startText as Text, range.startOffset);
    const end = this.offsetWithin(owner, endText as Text, range.endOffset);
    if (start < 0 || end <= start) return null;
    const startEl = this.effectiveElement(startText);
    const endEl = this.effectiveElement(endText);
    return {
      path: buildPath(this.root, owner),
      start,
      quote: this.elementText(owner).slice(start, end),
      spansElements: startEl !== endEl,
    };
  }

  /** Nearest element ancestor, looking through highlight marks. */
  private effectiveElement(node: Node): Element | null {
    let el = this.nearestElement(node);
    while (el && el.hasAttribute(ANNOTATION_ATTR)) el = el.parentElement;
    return el;
  }

  currentSelection(): SelectionInfo | null {
    const selection = window.getSelection?.();
    if (!selection || selection.rangeCount === 0 || selection.isCollapsed) {
      return null;
    }
    return this.selectionFromRange(selection.getRangeAt(0));
  }
}

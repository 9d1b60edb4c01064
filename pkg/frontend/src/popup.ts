// The selection popup: appears when the user selects page text, offers
// the five annotation types, and for questions a menu of built-in
// prompts. Selections spanning several elements get guidance toward the
// multi-anchor path instead of type buttons.

import type { AnnotationType } from "./types.js";
import { ANNOTATION_TYPES, QUESTION_PROMPTS } from "./types.js";
import type { SelectionInfo } from "./viewer.js";

export class SelectionPopup {
  el: HTMLElement;
  private current: SelectionInfo | null = null;

  constructor(
    parent: HTMLElement,
    private onPick: (type: AnnotationType, info: SelectionInfo,
                     promptBody?: string) => void,
  ) {
    this.el = document.createElement("div");
    this.el.className = "selection-popup";
    this.el.hidden = true;
    parent.appendChild(this.el);
  }

  show(info: SelectionInfo, x = 0, y = 0): void {
    this.current = info;
    this.el.textContent = "";
    this.el.style.left = `${x}px`;
    this.el.style.top = `${y}px`;
    if (info.spansElements) {
      const note = document.createElement("p");
      note.className = "popup-guidance";
      note.textContent =
        "Selection spans multiple elements. Select within one element, " +
        "or use “+ anchor from selection” on an annotation to add it " +
        "as an extra anchor.";
      this.el.appendChild(note);
      this.el.hidden = false;
      return;
    }
    for (const type of ANNOTATION_TYPES) {
      const b = document.createElement("button");
      b.type = "button";
      b.className = `popup-type popup-type-${type}`;
      b.textContent = type;
      b.addEventListener("click", () => {
        if (type === "question") {
          this.showPrompts();
        } else {
          this.pick(type);
        }
      });
      this.el.appendChild(b);
    }
    this.el.hidden = false;
  }

  private showPrompts(): void {
    const menu = document.createElement("div");
    menu.className = "prompt-menu";
    for (const prompt of QUESTION_PROMPTS) {
      const b = document.createElement("button");
      b.type = "button";
      b.className = "prompt-item";
      b.textContent = prompt;
      b.addEventListener("click", () => this.pick("question", prompt));
      menu.appendChild(b);
    }
    const custom = document.createElement("button");
    custom.type = "button";
    custom.className = "prompt-item prompt-custom";
    custom.textContent = "write my own…";
    custom.addEventListener("click", () => this.pick("question"));
    menu.appendChild(custom);
    this.el.appendChild(menu);
  }

  private pick(type: AnnotationType, promptBody?: string): void {
    if (!this.current) return;
    const info = this.current;
    this.hide();
    this.onPick(type, info, promptBody);
  }

  hide(): void {
    this.el.hidden = true;
    this.current = null;
  }
}

// Wire types, mirroring the server's JSON schemas exactly.

export interface SelectorJson {
  page_url: string;
  path: string;
  quote: string;
  start_offset: number;
  end_offset: number;
  broken?: boolean;
}

export type VisibilityJson = "public" | "private" | { group: string };

export interface ReplyJson {
  id: string;
  author: string;
  body: string;
  created_at: string;
}

export type AnnotationType = "normal" | "highlight" | "question" | "issue" | "todo";

export type StateJson =
  | { kind: "unanswered" }
  | { kind: "answered"; answer_text: string; answered_at: string }
  | { kind: "not_relevant"; at: string }
  | { kind: "open" }
  | { kind: "done"; at: string }
  | null;

export interface AnnotationJson {
  id: string;
  author: string;
  type: AnnotationType;
  body: string;
  anchors: SelectorJson[];
  tags: string[];
  visibility: VisibilityJson;
  pinned: boolean;
  state: StateJson;
  replies: ReplyJson[];
  created_at: string;
  modified_at: string;
  revision: number;
  deleted: boolean;
}

export interface ChangeEventJson {
  kind: "created" | "updated" | "deleted";
  seq: number;
  annotation: AnnotationJson;
}

export type TreeChild = TreeNodeJson | { text: string };

export interface TreeNodeJson {
  tag: string;
  children: TreeChild[];
}

export interface DocumentTreeJson {
  url: string;
  fetched_at: string;
  root: TreeNodeJson;
}

export interface ErrorBody {
  code: string;
  message: string;
}

export interface AnnotationDraft {
  type: AnnotationType;
  body: string;
  anchors: SelectorJson[];
  tags?: string[];
  visibility?: VisibilityJson;
}

export const ANNOTATION_TYPES: AnnotationType[] = [
  "normal", "highlight", "question", "issue", "todo",
];

// Built-in question prompts offered by the selection popup; the first is
// the canonical one, the set is configurable.
export const QUESTION_PROMPTS = [
  "How do I use this?",
  "What does this do?",
  "Why is this needed?",
];

// HTTP client for the annotation service. Identity rides on the trusted
// X-User header; every method returns parsed JSON or throws ApiError
// with the server's {code, message} body.

import type {
  AnnotationDraft,
  AnnotationJson,
  DocumentTreeJson,
  ErrorBody,
  SelectorJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export interface QueryParams {
  url?: string;
  scope: "page" | "site" | "all";
  types?: string[];
  tags?: string[];
  q?: string;
  sort?: "document_order" | "time_desc" | "time_asc";
  from?: string;
  to?: string;
}

export class ApiClient {
  constructor(public baseUrl: string, public user: string | null = null) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private headers(json: boolean): Record<string, string> {
    const out: Record<string, string> = {};
    if (this.user) out["X-User"] = this.user;
    if (json) out["Content-Type"] = "application/json";
    return out;
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: this.headers(body !== undefined),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const err = (payload ?? {}) as ErrorBody;
      throw new ApiError(response.status, err.code ?? "unknown",
        err.message ?? response.statusText);
    }
    return payload as T;
  }

  listAnnotations(params: QueryParams): Promise<AnnotationJson[]> {
    const search = new URLSearchParams();
    search.set("scope", params.scope);
    if (params.url) search.set("url", params.url);
    if (params.types?.length) search.set("types", params.types.join(","));
    if (params.tags?.length) search.set("tags", params.tags.join(","));
    if (params.q) search.set("q", params.q);
    if (params.sort) search.set("sort", params.sort);
    if (params.from) search.set("from", params.from);
    if (params.to) search.set("to", params.to);
    return this.call("GET", `/annotations?${search}`);
  }

  createAnnotation(draft: AnnotationDraft): Promise<AnnotationJson> {
    return this.call("POST", "/annotations", {
      type: draft.type,
      body: draft.body,
      anchors: draft.anchors,
      tags: draft.tags ?? [],
      visibility: draft.visibility ?? "public",
    });
  }

  patchAnnotation(id: string, expectedRevision: number, changes: {
    body?: string; tags?: string[]; anchors?: SelectorJson[];
  }): Promise<AnnotationJson> {
    return this.call("PATCH", `/annotations/${id}`,
      { expected_revision: expectedRevision, ...changes });
  }

  deleteAnnotation(id: string): Promise<AnnotationJson> {
    return this.call("DELETE", `/annotations/${id}`);
  }

  reply(id: string, body: string): Promise<AnnotationJson> {
    return this.call("POST", `/annotations/${id}/replies`, { body });
  }

  answer(id: string, text: string): Promise<AnnotationJson> {
    return this.call("POST", `/annotations/${id}/state`,
      { action: "answer", text });
  }

  dismiss(id: string): Promise<AnnotationJson> {
    return this.call("POST", `/annotations/${id}/state`, { action: "dismiss" });
  }

  complete(id: string): Promise<AnnotationJson> {
    return this.call("POST", `/annotations/${id}/state`, { action: "complete" });
  }

  pin(id: string): Promise<AnnotationJson> {
    return this.call("POST", `/annotations/${id}/pin`, {});
  }

  unpin(id: string): Promise<AnnotationJson> {
    return this.call("DELETE", `/annotations/${id}/pin`);
  }

  pinList(): Promise<AnnotationJson[]> {
    return this.call("GET", "/pins");
  }

  documentTree(url: string): Promise<DocumentTreeJson> {
    const search = new URLSearchParams({ url, format: "tree" });
    return this.call("GET", `/documents?${search}`);
  }

  issueReport(id: string): Promise<Record<string, unknown>> {
    return this.call("POST", `/issues/${id}/report`, {});
  }

  eventsUrl(pageUrl: string): string {
    const search = new URLSearchParams({ url: pageUrl });
    return `${this.baseUrl}/events?${search}`;
  }
}

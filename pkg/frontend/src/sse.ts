// Server-push event stream client. The native EventSource cannot send
// the X-User header, so this reads the text/event-stream framing off a
// streaming fetch. The parser is standalone for testability.

export interface SSEFrame {
  event: string | null;
  data: string;
}

export class SSEParser {
  private buffer = "";
  private eventName: string | null = null;
  private dataLines: string[] = [];

  /** Feed a chunk; returns every frame completed by it. */
  push(chunk: string): SSEFrame[] {
    this.buffer += chunk;
    const frames: SSEFrame[] = [];
    let at: number;
    while ((at = this.buffer.indexOf("\n")) !== -1) {
      const line = this.buffer.slice(0, at).replace(/\r$/, "");
      this.buffer = this.buffer.slice(at + 1);
      if (line === "") {
        if (this.dataLines.length) {
          frames.push({ event: this.eventName, data: this.dataLines.join("\n") });
        }
        this.eventName = null;
        this.dataLines = [];
      } else if (line.startsWith(":")) {
        continue; // comment / keepalive
      } else if (line.startsWith("event:")) {
        this.eventName = line.slice(6).trim();
      } else if (line.startsWith("data:")) {
        this.dataLines.push(line.slice(5).replace(/^ /, ""));
      }
    }
    return frames;
  }
}

export class EventStream {
  private controller = new AbortController();
  closed = false;

  constructor(
    private url: string,
    private user: string | null,
    private onFrame: (frame: SSEFrame) => void,
    private onClose: (error: unknown | null) => void,
  ) {}

  async start(): Promise<void> {
    const headers: Record<string, string> = { Accept: "text/event-stream" };
    if (this.user) headers["X-User"] = this.user;
    let response: Response;
    try {
      response = await fetch(this.url, { headers, signal: this.controller.signal });
    } catch (error) {
      this.closed = true;
      this.onClose(error);
      return;
    }
    if (!response.ok || !response.body) {
      this.closed = true;
      this.onClose(new Error(`event stream failed: ${response.status}`));
      return;
    }
    void this.consume(response.body);
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    const parser = new SSEParser();
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
          this.onFrame(frame);
        }
      }
      if (!this.closed) {
        this.closed = true;
        this.onClose(null);
      }
    } catch (error) {
      if (!this.closed) {
        this.closed = true;
        this.onClose(this.controller.signal.aborted ? null : error);
      }
    }
  }

  close(): void {
    this.closed = true;
    this.controller.abort();
  }
}

import { describe, expect, it } from "vitest";

import { SSEParser } from "../src/sse.js";

describe("SSEParser", () => {
  it("parses a single data frame", () => {
    const parser = new SSEParser();
    expect(parser.push('data: {"a": 1}\n\n')).toEqual([
      { event: null, data: '{"a": 1}' },
    ]);
  });

  it("handles chunks split mid-line", () => {
    const parser = new SSEParser();
    expect(parser.push("da")).toEqual([]);
    expect(parser.push("ta: hello\n")).toEqual([]);
    expect(parser.push("\n")).toEqual([{ event: null, data: "hello" }]);
  });

  it("ignores comments and keepalives", () => {
    const parser = new SSEParser();
    expect(parser.push(": connected\n\n: keepalive\n\ndata: x\n\n")).toEqual([
      { event: null, data: "x" },
    ]);
  });

  it("carries event names", () => {
    const parser = new SSEParser();
    expect(parser.push('event: error\ndata: {"code":"subscriber-dropped"}\n\n'))
      .toEqual([{ event: "error", data: '{"code":"subscriber-dropped"}' }]);
    // the name does not leak into the next frame
    expect(parser.push("data: plain\n\n")).toEqual([
      { event: null, data: "plain" },
    ]);
  });

  it("joins multi-line data", () => {
    const parser = new SSEParser();
    expect(parser.push("data: one\ndata: two\n\n")).toEqual([
      { event: null, data: "one\ntwo" },
    ]);
  });

  it("parses several frames from one chunk in order", () => {
    const parser = new SSEParser();
    const frames = parser.push("data: 1\n\ndata: 2\n\ndata: 3\n\n");
    expect(frames.map((f) => f.data)).toEqual(["1", "2", "3"]);
  });
});

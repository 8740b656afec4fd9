import { describe, expect, it } from "vitest";
import {
  UNKNOWN_ID,
  errorResponse,
  okResponse,
  parseRequestLine,
} from "../src/protocol.js";

describe("parseRequestLine", () => {
  it("accepts a well-formed request", () => {
    const parsed = parseRequestLine(
      '{"id": "req-1", "prompt": "A car", "seed": 0, "batch": 3}',
    );
    expect(parsed).toEqual({
      kind: "request",
      request: { id: "req-1", prompt: "A car", seed: 0, batch: 3 },
    });
  });

  it("tolerates extra fields", () => {
    const parsed = parseRequestLine(
      '{"id": "x", "prompt": "A car", "seed": 7, "batch": 1, "device": "cuda:0"}',
    );
    expect(parsed.kind).toBe("request");
  });

  it("flags non-JSON with the unknown id", () => {
    const parsed = parseRequestLine("this is not json");
    expect(parsed).toEqual({
      kind: "invalid",
      id: UNKNOWN_ID,
      message: "request line is not valid JSON",
    });
  });

  it.each(["[1, 2, 3]", '"just a string"', "42", "null"])(
    "rejects non-object JSON: %s",
    (line) => {
      const parsed = parseRequestLine(line);
      expect(parsed.kind).toBe("invalid");
      if (parsed.kind === "invalid") expect(parsed.id).toBe(UNKNOWN_ID);
    },
  );

  it("uses the unknown id when id is missing or not a string", () => {
    for (const line of [
      '{"prompt": "A car", "seed": 0, "batch": 1}',
      '{"id": 17, "prompt": "A car", "seed": 0, "batch": 1}',
      '{"id": "", "prompt": "A car", "seed": 0, "batch": 1}',
    ]) {
      const parsed = parseRequestLine(line);
      expect(parsed.kind).toBe("invalid");
      if (parsed.kind === "invalid") expect(parsed.id).toBe(UNKNOWN_ID);
    }
  });

  it("echoes the id when a later field is bad", () => {
    const cases: Array<[string, RegExp]> = [
      ['{"id": "r", "seed": 0, "batch": 1}', /prompt/],
      ['{"id": "r", "prompt": "", "seed": 0, "batch": 1}', /prompt/],
      ['{"id": "r", "prompt": "   ", "seed": 0, "batch": 1}', /prompt/],
      ['{"id": "r", "prompt": "A car", "seed": 0.5, "batch": 1}', /seed/],
      ['{"id": "r", "prompt": "A car", "seed": "0", "batch": 1}', /seed/],
      ['{"id": "r", "prompt": "A car", "seed": 0}', /batch/],
      ['{"id": "r", "prompt": "A car", "seed": 0, "batch": 0}', /batch/],
      ['{"id": "r", "prompt": "A car", "seed": 0, "batch": -2}', /batch/],
      ['{"id": "r", "prompt": "A car", "seed": 0, "batch": 1.5}', /batch/],
    ];
    for (const [line, pattern] of cases) {
      const parsed = parseRequestLine(line);
      expect(parsed.kind, line).toBe("invalid");
      if (parsed.kind === "invalid") {
        expect(parsed.id, line).toBe("r");
        expect(parsed.message, line).toMatch(pattern);
      }
    }
  });
});

describe("response shapes", () => {
  it("ok responses carry the paths and an empty message", () => {
    expect(okResponse("a", ["/x.obj"])).toEqual({
      id: "a",
      status: "ok",
      mesh_paths: ["/x.obj"],
      message: "",
    });
  });

  it("error responses carry the message and no paths", () => {
    expect(errorResponse("b", "boom")).toEqual({
      id: "b",
      status: "error",
      mesh_paths: [],
      message: "boom",
    });
  });
});

import { describe, expect, it } from "vitest";

import { EditorState, adjustCaret } from "../src/state.js";
import type { CorrectionResponse } from "../src/types.js";

function response(text: string, flagged: Record<string, string[]>): CorrectionResponse {
  // build spans the way the service does: tokens are whitespace runs here
  const tokens = [];
  const re = /\S+/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(text)) !== null) {
    const word = m[0];
    const suggestions = flagged[word] ?? [];
    tokens.push({
      token: word,
      start: m.index,
      end: m.index + word.length,
      is_error: word in flagged,
      p_error: word in flagged ? 0.9 : 0.05,
      suggestions: suggestions.map((w, i) => ({ word: w, prob: 0.5 - i * 0.1 })),
    });
  }
  return { tokens, model_version: "test", latency_ms: 1.0, truncated: false };
}

describe("EditorState", () => {
  it("starts empty and clean", () => {
    const state = new EditorState();
    expect(state.rawText).toBe("");
    expect(state.lastResponse).toBeNull();
    expect(state.dirty).toBe(false);
    expect(state.activeHighlights()).toEqual([]);
  });

  it("does not set dirty before the first check", () => {
    const state = new EditorState();
    state.setText("toi di hoc");
    expect(state.dirty).toBe(false);
  });

  it("sets dirty on edits after a check", () => {
    const state = new EditorState();
    state.setText("toi di hoc");
    state.applyCheck(response("toi di hoc", { toi: ["tôi"] }));
    expect(state.dirty).toBe(false);
    state.setText("toi di hoc!");
    expect(state.dirty).toBe(true);
  });

  it("accept splices only the targeted token", () => {
    const state = new EditorState();
    state.setText("toi di hoc o ha noi");
    state.applyCheck(response("toi di hoc o ha noi",
      { toi: ["tôi"], hoc: ["học"], noi: ["nội"] }));
    state.accept(2, "học");
    expect(state.rawText).toBe("toi di học o ha noi");
    // other tokens still address their (shifted) spans
    for (const i of state.activeHighlights()) {
      const tok = state.tokenAt(i);
      expect(state.rawText.slice(tok.start, tok.end)).toBe(tok.token);
    }
    expect(state.dirty).toBe(true);
  });

  it("accept shifts later spans when length changes", () => {
    const state = new EditorState();
    state.setText("mot chuec xe");
    state.applyCheck(response("mot chuec xe", { chuec: ["chiếc"], xe: ["xem"] }));
    state.accept(1, "chiếc");
    expect(state.rawText).toBe("mot chiếc xe");
    const xe = state.tokenAt(2);
    expect(state.rawText.slice(xe.start, xe.end)).toBe("xe");
    state.accept(2, "xem");
    expect(state.rawText).toBe("mot chiếc xem");
  });

  it("accept and dismiss are single-shot per token", () => {
    const state = new EditorState();
    state.setText("toi di");
    state.applyCheck(response("toi di", { toi: ["tôi"] }));
    state.accept(0, "tôi");
    state.accept(0, "TÔI");
    expect(state.rawText).toBe("tôi di");
    expect(state.activeHighlights()).toEqual([]);
  });

  it("dismiss clears the highlight without editing", () => {
    const state = new EditorState();
    state.setText("toi di");
    state.applyCheck(response("toi di", { toi: ["tôi"] }));
    state.dismiss(0);
    expect(state.rawText).toBe("toi di");
    expect(state.activeHighlights()).toEqual([]);
    expect(state.dirty).toBe(false);
  });

  it("rejects out-of-range token indices", () => {
    const state = new EditorState();
    state.setText("toi");
    state.applyCheck(response("toi", {}));
    expect(() => state.accept(5, "x")).toThrow(RangeError);
  });
});

describe("adjustCaret", () => {
  it("keeps caret before the splice", () => {
    expect(adjustCaret(2, 4, 8, 6)).toBe(2);
  });
  it("shifts caret after the splice", () => {
    expect(adjustCaret(10, 4, 8, 6)).toBe(12);
  });
  it("clamps caret inside the splice to its end", () => {
    expect(adjustCaret(6, 4, 8, 2)).toBe(6);
    expect(adjustCaret(5, 4, 8, 1)).toBe(5);
  });
});

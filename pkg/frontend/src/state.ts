import type { ApiToken, CorrectionResponse, Decision } from "./types.js";

/**
 * Pure editor state: the text, the last check result and one decision per
 * token.  Accepting splices the replacement into the text immediately and
 * shifts the stored spans of later tokens, so chained accepts stay
 * addressable; any text change after a check sets the dirty flag.
 */
export class EditorState {
  rawText = "";
  lastResponse: CorrectionResponse | null = null;
  decisions: Decision[] = [];
  dirty = false;

  setText(text: string): void {
    if (text === this.rawText) return;
    this.rawText = text;
    if (this.lastResponse !== null) this.dirty = true;
  }

  applyCheck(response: CorrectionResponse): void {
    this.lastResponse = response;
    this.decisions = response.tokens.map(() => ({ kind: "pending" }));
    this.dirty = false;
  }

  tokenAt(index: number): ApiToken {
    const token = this.lastResponse?.tokens[index];
    if (!token) throw new RangeError(`no token at index ${index}`);
    return token;
  }

  /** Indices still highlighted: flagged by the model and undecided. */
  activeHighlights(): number[] {
    if (!this.lastResponse) return [];
    return this.lastResponse.tokens
      .map((tok, i) => ({ tok, i }))
      .filter(({ tok, i }) => tok.is_error && this.decisions[i]?.kind === "pending")
      .map(({ i }) => i);
  }

  /**
   * Splice `word` over the token's span.  Only the targeted token changes;
   * spans of the following tokens shift by the length delta.
   */
  accept(index: number, word: string): void {
    const token = this.tokenAt(index);
    if (this.decisions[index]?.kind !== "pending") return;
    const oldEnd = token.end;
    const delta = word.length - (oldEnd - token.start);
    this.rawText = this.rawText.slice(0, token.start) + word + this.rawText.slice(oldEnd);
    token.end = oldEnd + delta;
    for (const other of this.lastResponse!.tokens) {
      if (other !== token && other.start >= oldEnd) {
        other.start += delta;
        other.end += delta;
      }
    }
    this.decisions[index] = { kind: "accepted", word };
    this.dirty = true;
  }

  dismiss(index: number): void {
    this.tokenAt(index);
    if (this.decisions[index]?.kind !== "pending") return;
    this.decisions[index] = { kind: "dismissed" };
  }
}

/** New caret position after replacing [start, end) with `newLength` chars. */
export function adjustCaret(caret: number, start: number, end: number, newLength: number): number {
  if (caret <= start) return caret;
  if (caret >= end) return caret + (newLength - (end - start));
  return start + newLength;
}

import { ApiClient, RequestCancelled, ServiceUnavailableError } from "./api.js";
import { EditorState } from "./state.js";

/**
 * Glue between the editor state and the service: runs checks, applies
 * accept/dismiss, and turns transport failures into a non-blocking banner
 * (the editor keeps working while the service is down or loading).
 */
export class EditorController {
  readonly state = new EditorState();
  banner: string | null = null;

  constructor(private readonly client: ApiClient, private readonly topK = 3) {}

  setText(text: string): void {
    this.state.setText(text);
  }

  async check(): Promise<boolean> {
    try {
      const response = await this.client.check(this.state.rawText, this.topK);
      this.state.applyCheck(response);
      this.banner = null;
      return true;
    } catch (err) {
      if (err instanceof RequestCancelled) return false;
      if (err instanceof ServiceUnavailableError) {
        this.banner = "The correction service is starting up - try again shortly.";
      } else {
        this.banner = "Cannot reach the correction service.";
      }
      return false;
    }
  }

  accept(index: number, word: string): void {
    this.state.accept(index, word);
  }

  acceptTop(index: number): void {
    const top = this.state.tokenAt(index).suggestions[0];
    if (top) this.state.accept(index, top.word);
  }

  dismiss(index: number): void {
    this.state.dismiss(index);
  }
}

/**
 * Debounced single-flight request scheduler.
 *
 * Edits call noteEdit(); after the quiet period one synthesis runs. The
 * Synthesize button calls requestNow() and skips the wait. At most one
 * request is ever in flight: if an edit lands mid-flight the current
 * request is aborted and a fresh one starts, so the newest state always
 * wins and the server never sees a queue.
 */

export type RunFn = (signal: AbortSignal) => Promise<void>;

export const DEFAULT_DEBOUNCE_MS = 400;

export class SynthesisScheduler {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private controller: AbortController | null = null;
  private rerun = false;

  constructor(
    private readonly run: RunFn,
    readonly delayMs: number = DEFAULT_DEBOUNCE_MS,
  ) {}

  get inFlight(): boolean {
    return this.controller !== null;
  }

  /** Debounced trigger; successive calls within delayMs coalesce. */
  noteEdit(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.kick();
    }, this.delayMs);
  }

  /** Immediate trigger for the primary button. */
  requestNow(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.kick();
  }

  private kick(): void {
    if (this.controller !== null) {
      // A newer request supersedes the one in flight.
      this.rerun = true;
      this.controller.abort();
      return;
    }
    const controller = new AbortController();
    this.controller = controller;
    void this.run(controller.signal)
      .catch(() => {
        // run() owns its error reporting; aborts land here too.
      })
      .finally(() => {
        this.controller = null;
        if (this.rerun) {
          this.rerun = false;
          this.kick();
        }
      });
  }
}

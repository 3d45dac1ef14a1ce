/**
 * Live edge preview scheduling: at most one request per cadence window,
 * newest-request-wins rendering. The server computes the preview so the
 * overlay is pixel-identical to the pipeline's first stage; this module
 * only decides when to send and which response is still worth drawing.
 */

export type PreviewSend = (frame: Blob, query: string) => Promise<Blob>;

export interface PreviewLoopOptions {
  cadenceMs?: number;
  now?: () => number;
  onError?: (err: unknown) => void;
}

export class PreviewLoop {
  private seq = 0;
  private renderedSeq = 0;
  private lastSentAt = Number.NEGATIVE_INFINITY;
  private readonly cadenceMs: number;
  private readonly now: () => number;
  private readonly onError: (err: unknown) => void;

  constructor(
    private readonly send: PreviewSend,
    private readonly render: (png: Blob) => void,
    options: PreviewLoopOptions = {}
  ) {
    this.cadenceMs = options.cadenceMs ?? 250;
    this.now = options.now ?? (() => Date.now());
    this.onError = options.onError ?? (() => undefined);
  }

  /**
   * Offer a frame. Returns true when a request was actually sent; offers
   * inside the cadence window are dropped (the next tick brings a fresher
   * frame anyway).
   */
  offer(frame: Blob, query: string): boolean {
    const t = this.now();
    if (t - this.lastSentAt < this.cadenceMs) return false;
    this.lastSentAt = t;
    const id = ++this.seq;
    this.send(frame, query).then(
      (png) => {
        // A response older than something already drawn is stale.
        if (id > this.renderedSeq) {
          this.renderedSeq = id;
          this.render(png);
        }
      },
      (err) => this.onError(err)
    );
    return true;
  }
}

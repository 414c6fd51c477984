/** Fire-and-forget click reporting with bounded retry and an offline queue.
 *
 * Each click is delivered at most once: a delivery attempt retries up to
 * three times with exponential backoff, and on exhaustion the event is
 * parked in a local queue that `flush()` drains on the next interaction.
 */

export interface ClickEvent {
  query: string;
  rank: number;
}

export type ClickPoster = (event: ClickEvent) => Promise<{ ok: boolean }>;
export type Sleeper = (ms: number) => Promise<void>;

const defaultSleep: Sleeper = (ms) =>
  new Promise((resolve) => setTimeout(resolve, ms));

export class TelemetryQueue {
  private queue: ClickEvent[] = [];
  private flushing = false;

  constructor(
    private readonly poster: ClickPoster,
    private readonly attempts = 3,
    private readonly baseDelayMs = 200,
    private readonly sleep: Sleeper = defaultSleep,
  ) {}

  get pending(): number {
    return this.queue.length;
  }

  private async tryDeliver(event: ClickEvent): Promise<boolean> {
    for (let attempt = 0; attempt < this.attempts; attempt += 1) {
      if (attempt > 0) {
        await this.sleep(this.baseDelayMs * 2 ** (attempt - 1));
      }
      try {
        const resp = await this.poster(event);
        if (resp.ok) {
          return true;
        }
      } catch {
        /* network failure: retry */
      }
    }
    return false;
  }

  /** Deliver one click; on exhausted retries, park it for a later flush. */
  async report(event: ClickEvent): Promise<boolean> {
    const delivered = await this.tryDeliver(event);
    if (!delivered) {
      this.queue.push(event);
    }
    return delivered;
  }

  /** Drain the offline queue; events that still fail stay queued. */
  async flush(): Promise<void> {
    if (this.flushing || this.queue.length === 0) {
      return;
    }
    this.flushing = true;
    try {
      const parked = this.queue;
      this.queue = [];
      for (const event of parked) {
        const delivered = await this.tryDeliver(event);
        if (!delivered) {
          this.queue.push(event);
        }
      }
    } finally {
      this.flushing = false;
    }
  }
}

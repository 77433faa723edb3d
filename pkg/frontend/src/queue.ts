/** Optimistic label queue: local-first with undo until flushed.
 *
 * Labels land in the queue immediately (the UI advances without waiting),
 * are persisted to storage so a page reload loses nothing, and are sent to
 * the service in batches. Confirmed labels leave the queue; rejected ones
 * are dropped with a surfaced error; network failures keep everything
 * queued for retry.
 */

import { ApiClient, ApiError } from "./api.js";

export interface QueuedLabel {
  itemId: string;
  labelId: number;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface FlushReport {
  confirmed: QueuedLabel[];
  rejected: { label: QueuedLabel; code: string; message: string }[];
  /** true when a network/server failure left labels queued for retry */
  retryPending: boolean;
}

export class LabelQueue {
  private pending: QueuedLabel[] = [];
  private readonly storageKey: string;

  constructor(
    private readonly client: ApiClient,
    private readonly sessionId: string,
    private readonly storage: StorageLike | null = null,
    private readonly annotator: string = "anonymous",
  ) {
    this.storageKey = `screenclust-queue-${sessionId}`;
    if (this.storage) {
      const raw = this.storage.getItem(this.storageKey);
      if (raw) {
        try {
          this.pending = JSON.parse(raw) as QueuedLabel[];
        } catch {
          this.storage.removeItem(this.storageKey);
        }
      }
    }
  }

  get entries(): readonly QueuedLabel[] {
    return this.pending;
  }

  get size(): number {
    return this.pending.length;
  }

  has(itemId: string): boolean {
    return this.pending.some((l) => l.itemId === itemId);
  }

  add(label: QueuedLabel): void {
    this.pending.push(label);
    this.persist();
  }

  /** Remove the most recent unflushed label; it is never sent. */
  undo(): QueuedLabel | null {
    const popped = this.pending.pop() ?? null;
    this.persist();
    return popped;
  }

  /** Drop entries not in `itemIds` (already confirmed server-side). */
  reconcileWithBatch(pendingItemIds: Set<string>): QueuedLabel[] {
    const dropped = this.pending.filter((l) => !pendingItemIds.has(l.itemId));
    this.pending = this.pending.filter((l) => pendingItemIds.has(l.itemId));
    this.persist();
    return dropped;
  }

  /** Submit everything queued. One batched request; if the service rejects
   * the batch, fall back to per-label submission so only the offending
   * labels are dropped. */
  async flush(): Promise<FlushReport> {
    const report: FlushReport = { confirmed: [], rejected: [], retryPending: false };
    if (this.pending.length === 0) return report;
    const batch = [...this.pending];
    try {
      await this.client.submitLabels(this.sessionId, this.toSubmissions(batch));
      report.confirmed = batch;
      this.pending = this.pending.slice(batch.length);
      this.persist();
      return report;
    } catch (err) {
      if (!(err instanceof ApiError) || err.status >= 500) {
        report.retryPending = true; // network or server fault: keep queued
        return report;
      }
    }
    // batched submission rejected: isolate offenders one by one
    for (const label of batch) {
      try {
        await this.client.submitLabels(this.sessionId, this.toSubmissions([label]));
        report.confirmed.push(label);
      } catch (err) {
        if (err instanceof ApiError && err.status < 500) {
          report.rejected.push({ label, code: err.code, message: err.message });
        } else {
          report.retryPending = true;
          break;
        }
      }
    }
    const done = new Set(
      [...report.confirmed, ...report.rejected.map((r) => r.label)].map(
        (l) => l.itemId,
      ),
    );
    this.pending = this.pending.filter((l) => !done.has(l.itemId));
    this.persist();
    return report;
  }

  private toSubmissions(labels: QueuedLabel[]) {
    return labels.map((l) => ({
      item_id: l.itemId,
      label_id: l.labelId,
      annotator: this.annotator,
    }));
  }

  private persist(): void {
    if (!this.storage) return;
    if (this.pending.length === 0) {
      this.storage.removeItem(this.storageKey);
    } else {
      this.storage.setItem(this.storageKey, JSON.stringify(this.pending));
    }
  }
}

/** Annotator session state: current batch, keyboard-first label selection,
 * optimistic queue, and reconciliation with the service on refresh.
 *
 * The service is the source of truth; this store only holds the optimistic
 * local view between flushes. All logic is DOM-free so it can run headless.
 */

import { ApiClient, BatchItem, BatchView, MetricsRow } from "./api.js";
import { LabelQueue, StorageLike } from "./queue.js";

export interface TaxonomyChoice {
  id: number;
  label: string;
  /** 1-9 while at most nine choices are visible */
  shortcut: number | null;
}

export type KeyAction =
  | { kind: "labeled"; itemId: string; labelId: number }
  | { kind: "undone"; itemId: string }
  | { kind: "filtered"; filter: string }
  | { kind: "none" };

export interface UiNotice {
  level: "error" | "info";
  message: string;
}

export class AnnotatorSession {
  batch: BatchView | null = null;
  filter = "";
  notices: UiNotice[] = [];
  queue: LabelQueue;

  constructor(
    private readonly client: ApiClient,
    readonly sessionId: string,
    opts: { storage?: StorageLike; annotator?: string } = {},
  ) {
    this.queue = new LabelQueue(
      client,
      sessionId,
      opts.storage ?? null,
      opts.annotator ?? "anonymous",
    );
  }

  /** Fetch the pending batch and reconcile the persisted queue with it:
   * queued labels for items the service no longer lists were already
   * confirmed (or the iteration advanced) and are dropped; the rest are
   * re-submitted so a reload never loses a label. */
  async refresh(): Promise<void> {
    this.batch = await this.client.getBatch(this.sessionId);
    const pendingIds = new Set(this.batch.items.map((i) => i.id));
    this.queue.reconcileWithBatch(pendingIds);
    if (this.queue.size > 0) {
      await this.flush();
    }
  }

  get complete(): boolean {
    return this.batch?.complete ?? false;
  }

  get iteration(): number {
    return this.batch?.iteration ?? 0;
  }

  /** Items still needing a label, optimistically-labeled ones excluded. */
  get remainingItems(): BatchItem[] {
    if (!this.batch) return [];
    return this.batch.items.filter((i) => !this.queue.has(i.id));
  }

  get currentItem(): BatchItem | null {
    return this.remainingItems[0] ?? null;
  }

  get progress(): { labeled: number; pending: number } {
    if (!this.batch) return { labeled: 0, pending: 0 };
    return {
      labeled: this.batch.progress.labeled + this.queue.size,
      pending: this.batch.progress.pending - this.queue.size,
    };
  }

  /** Taxonomy entries matching the typeahead filter, in taxonomy order. */
  visibleChoices(): TaxonomyChoice[] {
    if (!this.batch) return [];
    const needle = this.filter.toLowerCase();
    const matches = this.batch.taxonomy
      .map((label, id) => ({ id, label }))
      .filter(({ label }) => label.toLowerCase().includes(needle));
    return matches.map((m, pos) => ({
      ...m,
      shortcut: matches.length <= 9 || pos < 9 ? pos + 1 : null,
    }));
  }

  /** Keyboard protocol: digits 1-9 pick the nth visible label, letters
   * build the typeahead filter, Backspace/Escape edit it, Enter confirms a
   * unique match, Ctrl+Z undoes the last unflushed label. */
  handleKey(key: string, ctrl = false): KeyAction {
    if (ctrl && key.toLowerCase() === "z") {
      const undone = this.undo();
      return undone ? { kind: "undone", itemId: undone } : { kind: "none" };
    }
    if (!this.currentItem) return { kind: "none" };
    if (/^[1-9]$/.test(key)) {
      const choice = this.visibleChoices()[Number(key) - 1];
      if (choice) return this.labelCurrent(choice.id);
      return { kind: "none" };
    }
    if (key === "Enter") {
      const visible = this.visibleChoices();
      if (visible.length === 1) return this.labelCurrent(visible[0].id);
      return { kind: "none" };
    }
    if (key === "Backspace") {
      this.filter = this.filter.slice(0, -1);
      return { kind: "filtered", filter: this.filter };
    }
    if (key === "Escape") {
      this.filter = "";
      return { kind: "filtered", filter: this.filter };
    }
    if (key.length === 1 && /[a-z0-9 _-]/i.test(key)) {
      this.filter += key;
      return { kind: "filtered", filter: this.filter };
    }
    return { kind: "none" };
  }

  /** Optimistically label the current item and advance to the next one. */
  labelCurrent(labelId: number): KeyAction {
    const item = this.currentItem;
    if (!item || !this.batch) return { kind: "none" };
    if (labelId < 0 || labelId >= this.batch.taxonomy.length) {
      this.notices.push({ level: "error", message: `label ${labelId} not in taxonomy` });
      return { kind: "none" };
    }
    this.queue.add({ itemId: item.id, labelId });
    this.filter = "";
    return { kind: "labeled", itemId: item.id, labelId };
  }

  /** Undo the most recent unflushed label; that item rejoins the queue head. */
  undo(): string | null {
    const popped = this.queue.undo();
    return popped?.itemId ?? null;
  }

  /** Push queued labels to the service and surface the outcome. Rejected
   * labels put their items back in the remaining list with an error notice;
   * a network failure keeps the queue intact for retry. */
  async flush(): Promise<boolean> {
    const report = await this.queue.flush();
    for (const r of report.rejected) {
      this.notices.push({
        level: "error",
        message: `label for ${r.label.itemId} rejected (${r.code}): ${r.message}`,
      });
    }
    if (report.retryPending) {
      this.notices.push({
        level: "error",
        message: "service unreachable; labels kept locally and will be retried",
      });
      return false;
    }
    if (report.confirmed.length > 0 || report.rejected.length > 0) {
      this.batch = await this.client.getBatch(this.sessionId);
      this.queue.reconcileWithBatch(new Set(this.batch.items.map((i) => i.id)));
    }
    return true;
  }

  getMetrics(): Promise<MetricsRow[]> {
    return this.client.getMetrics(this.sessionId);
  }

  takeNotices(): UiNotice[] {
    const out = this.notices;
    this.notices = [];
    return out;
  }
}

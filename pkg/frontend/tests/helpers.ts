/** Shared test doubles: in-memory storage and a fake labeling service that
 * mirrors the real server's validation and iteration semantics. */

import { ApiClient, ApiError, BatchView, LabelSubmission, MetricsRow } from "../src/api.js";
import { StorageLike } from "../src/queue.js";

export class MemStorage implements StorageLike {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}

export class FakeService {
  iteration = 1;
  complete = false;
  labeled = new Map<string, number>();
  offline = false;
  metrics: MetricsRow[] = [{ iteration: 0, labels_seen: 0, silhouette: 0.1, dunn: 0.2, davies_bouldin: 2.0 }];

  constructor(
    public batches: string[][],
    public taxonomy: string[] = ["alpha", "beta", "gamma"],
  ) {}

  private get batchItems(): string[] {
    return this.batches[this.iteration - 1] ?? [];
  }

  getBatch(): BatchView {
    if (this.offline) throw new TypeError("fetch failed");
    const remaining = this.batchItems.filter((id) => !this.labeled.has(id));
    return {
      session_id: "fake",
      iteration: this.iteration,
      complete: this.complete,
      items: this.complete
        ? []
        : remaining.map((id) => ({ id, image_path: `/img/${id}`, text: `text ${id}` })),
      taxonomy: this.taxonomy,
      progress: {
        labeled: this.batchItems.length - remaining.length,
        pending: remaining.length,
      },
    };
  }

  submitLabels(labels: LabelSubmission[]): { remaining: number; iteration: number; complete: boolean } {
    if (this.offline) throw new TypeError("fetch failed");
    if (this.complete) throw new ApiError(409, "complete", "session already complete");
    for (const l of labels) {
      if (!this.batches.flat().includes(l.item_id)) {
        throw new ApiError(404, "unknown_item", `unknown item ${l.item_id}`);
      }
      if (!this.batchItems.includes(l.item_id)) {
        throw new ApiError(400, "not_pending", `${l.item_id} not in the pending batch`);
      }
      if (this.labeled.has(l.item_id)) {
        throw new ApiError(409, "duplicate_label", `${l.item_id} already labeled`);
      }
      if (l.label_id < 0 || l.label_id >= this.taxonomy.length) {
        throw new ApiError(400, "label_out_of_range", `label ${l.label_id} out of range`);
      }
    }
    for (const l of labels) this.labeled.set(l.item_id, l.label_id);
    const remaining = this.batchItems.filter((id) => !this.labeled.has(id)).length;
    if (remaining === 0) {
      this.metrics.push({
        iteration: this.iteration,
        labels_seen: this.labeled.size,
        silhouette: 0.1 + 0.05 * this.iteration,
        dunn: 0.2 + 0.05 * this.iteration,
        davies_bouldin: 2.0 - 0.1 * this.iteration,
      });
      if (this.iteration >= this.batches.length) {
        this.complete = true;
      } else {
        this.iteration += 1;
      }
    }
    return { remaining, iteration: this.iteration, complete: this.complete };
  }

  asClient(): ApiClient {
    const svc = this;
    const client = {
      baseUrl: "http://fake",
      createSession: async () => ({ session_id: "fake" }),
      getBatch: async () => svc.getBatch(),
      submitLabels: async (_sid: string, labels: LabelSubmission[]) =>
        svc.submitLabels(labels),
      getMetrics: async () => svc.metrics,
      imageUrl: (sid: string, itemId: string) => `http://fake/${sid}/${itemId}`,
    };
    return client as unknown as ApiClient;
  }
}

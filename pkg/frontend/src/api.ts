/** Typed client for the labeling service's HTTP+JSON endpoints. */

export interface BatchItem {
  id: string;
  image_path: string;
  text: string;
}

export interface BatchView {
  session_id: string;
  iteration: number;
  complete: boolean;
  items: BatchItem[];
  taxonomy: string[];
  progress: { labeled: number; pending: number };
}

export interface MetricsRow {
  iteration: number;
  labels_seen: number;
  [index: string]: number | number[] | null;
}

export interface SessionConfig {
  manifest_path: string;
  features_path: string;
  taxonomy_path: string;
  k?: number;
  batch_size?: number;
  iterations?: number;
  classifier?: string;
  proba_weight?: number;
  seed?: number;
  standardize?: boolean;
}

export interface LabelSubmission {
  item_id: string;
  label_id: number;
  annotator?: string;
}

export interface SubmitResult {
  remaining: number;
  iteration: number;
  complete: boolean;
}

/** Service-reported failure: carries the machine-readable error code. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let code = "http_error";
      let message = `${method} ${path} failed with ${resp.status}`;
      try {
        const payload = (await resp.json()) as { code?: string; message?: string };
        if (payload.code) code = payload.code;
        if (payload.message) message = payload.message;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  createSession(config: SessionConfig): Promise<{ session_id: string }> {
    return this.request("POST", "/sessions", config);
  }

  getBatch(sessionId: string): Promise<BatchView> {
    return this.request("GET", `/sessions/${sessionId}/batch`);
  }

  submitLabels(
    sessionId: string,
    labels: LabelSubmission[],
  ): Promise<SubmitResult> {
    return this.request("POST", `/sessions/${sessionId}/labels`, { labels });
  }

  async getMetrics(sessionId: string): Promise<MetricsRow[]> {
    const out = await this.request<{ metrics: MetricsRow[] }>(
      "GET",
      `/sessions/${sessionId}/metrics`,
    );
    return out.metrics;
  }

  imageUrl(sessionId: string, itemId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/items/${itemId}/image`;
  }
}

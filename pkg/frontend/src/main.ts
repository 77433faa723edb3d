/** Browser entrypoint: wires the headless session store to the DOM.
 *
 * URL: index.html?base=http://host:port&session=SESSION_ID
 */

import { ApiClient } from "./api.js";
import { chartSpecs, renderChartSvg } from "./charts.js";
import { AnnotatorSession } from "./store.js";

const FLUSH_DELAY_MS = 400;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function renderMetrics(session: AnnotatorSession): Promise<void> {
  try {
    const metrics = await session.getMetrics();
    el("charts").innerHTML = chartSpecs(metrics).map((s) => renderChartSvg(s)).join("");
  } catch {
    // metrics are best-effort; the labeling flow must not stall on them
  }
}

function render(session: AnnotatorSession, client: ApiClient): void {
  const banner = el("banner");
  banner.textContent = session
    .takeNotices()
    .map((n) => n.message)
    .join(" — ");

  if (session.complete) {
    el("item").innerHTML =
      '<p class="done">Session complete. Final metrics below.</p>';
    el("taxonomy").innerHTML = "";
    el("progress").textContent = `iteration ${session.iteration} — complete`;
    void renderMetrics(session);
    return;
  }

  const item = session.currentItem;
  const progress = session.progress;
  el("progress").textContent =
    `iteration ${session.iteration} — ${progress.labeled} labeled, ` +
    `${progress.pending} pending`;

  if (!item) {
    el("item").innerHTML = "<p>Submitting batch…</p>";
    el("taxonomy").innerHTML = "";
    return;
  }
  el("item").innerHTML =
    `<img src="${client.imageUrl(session.sessionId, item.id)}" alt="${item.id}"/>` +
    `<p class="snippet">${item.text || "(no extracted text)"}</p>` +
    `<p class="item-id">${item.id}</p>`;

  const filter = session.filter
    ? `<p class="filter">filter: <b>${session.filter}</b> (Esc clears)</p>`
    : `<p class="filter">type to filter, 1-9 to pick, Ctrl+Z to undo</p>`;
  el("taxonomy").innerHTML =
    filter +
    "<ol>" +
    session
      .visibleChoices()
      .map(
        (c) =>
          `<li data-label-id="${c.id}">` +
          (c.shortcut ? `<kbd>${c.shortcut}</kbd> ` : "") +
          `${c.label}</li>`,
      )
      .join("") +
    "</ol>";
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("base") ?? "";
  const sessionId = params.get("session");
  if (!sessionId) {
    el("banner").textContent = "missing ?session=ID in the URL";
    return;
  }
  const client = new ApiClient(base);
  const session = new AnnotatorSession(client, sessionId, {
    storage: window.localStorage,
    annotator: params.get("annotator") ?? "annotator",
  });

  let flushTimer: ReturnType<typeof setTimeout> | null = null;
  const scheduleFlush = () => {
    if (flushTimer) clearTimeout(flushTimer);
    flushTimer = setTimeout(() => {
      void session.flush().then(async (ok) => {
        if (ok && session.remainingItems.length === 0) {
          await session.refresh(); // iteration may have advanced
          await renderMetrics(session);
        }
        render(session, client);
      });
    }, FLUSH_DELAY_MS);
  };

  document.addEventListener("keydown", (ev) => {
    const action = session.handleKey(ev.key, ev.ctrlKey || ev.metaKey);
    if (action.kind !== "none") ev.preventDefault();
    if (action.kind === "labeled" || action.kind === "undone") scheduleFlush();
    render(session, client);
  });

  el("taxonomy").addEventListener("click", (ev) => {
    const li = (ev.target as HTMLElement).closest("li[data-label-id]");
    if (!li) return;
    session.labelCurrent(Number((li as HTMLElement).dataset.labelId));
    scheduleFlush();
    render(session, client);
  });

  try {
    await session.refresh(); // re-submits any queue persisted before a reload
  } catch (err) {
    el("banner").textContent =
      `service unreachable (${String(err)}); retrying in 3s`;
    setTimeout(() => void boot(), 3000);
    return;
  }
  await renderMetrics(session);
  render(session, client);
}

void boot();

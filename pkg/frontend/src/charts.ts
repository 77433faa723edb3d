/** Validity-index line charts rendered as standalone SVG markup. */

import { MetricsRow } from "./api.js";

export interface ChartPoint {
  x: number;
  y: number;
}

export interface ChartSpec {
  index: string;
  title: string;
  goal: "maximize" | "minimize";
  points: ChartPoint[];
}

const INDICES: { index: string; goal: "maximize" | "minimize" }[] = [
  { index: "silhouette", goal: "maximize" },
  { index: "dunn", goal: "maximize" },
  { index: "davies_bouldin", goal: "minimize" },
];

/** One chart per validity index, plotted against labels seen. Rows with a
 * non-finite value for an index are skipped for that chart only. */
export function chartSpecs(metrics: MetricsRow[]): ChartSpec[] {
  return INDICES.map(({ index, goal }) => ({
    index,
    goal,
    title: `${index} (${goal}) vs labels seen`,
    points: metrics
      .filter((row) => Number.isFinite(row[index] as number))
      .map((row) => ({ x: row.labels_seen, y: row[index] as number })),
  }));
}

export function renderChartSvg(
  spec: ChartSpec,
  width = 420,
  height = 260,
  margin = 36,
): string {
  const pts = spec.points;
  if (pts.length === 0) {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">` +
      `<title>${spec.title}</title>` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle">no data</text></svg>`
    );
  }
  const xs = pts.map((p) => p.x);
  const ys = pts.map((p) => p.y);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);
  const xSpan = xHi - xLo || 1;
  const ySpan = yHi - yLo || 1;
  const sx = (x: number) => margin + ((x - xLo) / xSpan) * (width - 2 * margin);
  const sy = (y: number) =>
    height - margin - ((y - yLo) / ySpan) * (height - 2 * margin);

  const line = pts.map((p) => `${sx(p.x).toFixed(2)},${sy(p.y).toFixed(2)}`).join(" ");
  const dots = pts
    .map(
      (p) =>
        `<circle cx="${sx(p.x).toFixed(2)}" cy="${sy(p.y).toFixed(2)}" r="3">` +
        `<title>labels=${p.x}, ${spec.index}=${p.y} (${spec.goal})</title></circle>`,
    )
    .join("");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `class="metric-chart" data-index="${spec.index}">` +
    `<title>${spec.title}: ${spec.goal === "maximize" ? "higher is better" : "lower is better"}</title>` +
    `<text x="${width / 2}" y="16" text-anchor="middle" font-size="12">${spec.title}</text>` +
    `<line x1="${margin}" y1="${height - margin}" x2="${width - margin}" y2="${height - margin}" stroke="black"/>` +
    `<line x1="${margin}" y1="${margin}" x2="${margin}" y2="${height - margin}" stroke="black"/>` +
    `<polyline points="${line}" fill="none" stroke="#1f77b4" stroke-width="2"/>` +
    `<g fill="#1f77b4">${dots}</g></svg>`
  );
}

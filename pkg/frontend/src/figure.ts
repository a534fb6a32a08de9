/** Build one rate-versus-power figure from a sweep CSV. */

import { readFileSync, writeFileSync } from "fs";
import { renderChart, Series } from "./chart.js";
import { parseSweepCsv, SweepRow } from "./csv.js";

export interface FigureSpec {
  csvPath: string;
  direction: "DL" | "UL";
  outPath: string;
  kLabel?: string;
  logY?: boolean;
}

/** One curve per (scheme, csi, bf) combination, in fixed legend order. */
const COMBO_STYLES: Array<{ key: string; color: string; dash: string }> = [
  { key: "CF/PCSI/FD", color: "#1f77b4", dash: "" },
  { key: "CF/PCSI/HY", color: "#1f77b4", dash: "6,3" },
  { key: "CF/ICSI/FD", color: "#2ca02c", dash: "" },
  { key: "CF/ICSI/HY", color: "#2ca02c", dash: "6,3" },
  { key: "UC/PCSI/FD", color: "#d62728", dash: "" },
  { key: "UC/PCSI/HY", color: "#d62728", dash: "6,3" },
  { key: "UC/ICSI/FD", color: "#ff7f0e", dash: "" },
  { key: "UC/ICSI/HY", color: "#ff7f0e", dash: "6,3" },
];

export function buildSeries(rows: SweepRow[], direction: string): Series[] {
  const byCombo = new Map<string, Array<{ x: number; y: number }>>();
  for (const row of rows) {
    if (row.direction !== direction) {
      continue;
    }
    const key = `${row.scheme}/${row.csi}/${row.bf}`;
    if (!byCombo.has(key)) {
      byCombo.set(key, []);
    }
    byCombo.get(key)!.push({ x: row.power_dbw, y: row.mean_rate_mbps });
  }
  const series: Series[] = [];
  for (const style of COMBO_STYLES) {
    const points = byCombo.get(style.key);
    if (points) {
      points.sort((a, b) => a.x - b.x);
      series.push({ label: style.key, color: style.color, dash: style.dash, points });
    }
  }
  // Combinations outside the fixed palette still render, in name order.
  const known = new Set(COMBO_STYLES.map((s) => s.key));
  const extras = [...byCombo.keys()].filter((k) => !known.has(k)).sort();
  extras.forEach((key, i) => {
    const points = byCombo.get(key)!;
    points.sort((a, b) => a.x - b.x);
    series.push({ label: key, color: "#7f7f7f", dash: i % 2 ? "2,2" : "", points });
  });
  return series;
}

/** Render the figure and write it to spec.outPath; returns the SVG text. */
export function render(spec: FigureSpec): string {
  const rows = parseSweepCsv(readFileSync(spec.csvPath, "utf8"));
  const series = buildSeries(rows, spec.direction);
  const label = spec.kLabel ? `, ${spec.kLabel}` : "";
  const svg = renderChart(series, {
    title: `Average ${spec.direction === "DL" ? "downlink" : "uplink"} rate per user` + label,
    xLabel: "Transmit power (dBW)",
    yLabel: "Rate per user (Mbit/s)",
    logY: spec.logY ?? false,
    xDomain: series.length === 0 ? [-30, 30] : undefined,
  });
  writeFileSync(spec.outPath, svg);
  return svg;
}

/** Minimal deterministic SVG line chart: same input data, same output bytes. */

export interface Series {
  label: string;
  color: string;
  dash: string;
  points: Array<{ x: number; y: number }>;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
  logY?: boolean;
  xDomain?: [number, number];
}

const MARGIN = { top: 40, right: 200, bottom: 48, left: 72 };

function fmt(value: number): string {
  // Fixed formatting keeps output byte-stable across runs.
  return Number(value.toFixed(3)).toString();
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const tick = step * factor;
  const start = Math.ceil(lo / tick) * tick;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-9 * tick; v += tick) {
    ticks.push(Number(v.toFixed(10)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    const v = Math.pow(10, e);
    if (v >= lo / (1 + 1e-9) && v <= hi * (1 + 1e-9)) {
      ticks.push(v);
    }
  }
  return ticks.length > 0 ? ticks : [lo, hi];
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render a line chart as a standalone SVG document. */
export function renderChart(seriesList: Series[], options: ChartOptions): string {
  const width = options.width ?? 760;
  const height = options.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const allPoints = seriesList.flatMap((s) => s.points);
  let x0 = options.xDomain?.[0] ?? Math.min(...allPoints.map((p) => p.x));
  let x1 = options.xDomain?.[1] ?? Math.max(...allPoints.map((p) => p.x));
  if (allPoints.length === 0) {
    [x0, x1] = options.xDomain ?? [0, 1];
  }
  if (x0 === x1) {
    x0 -= 1;
    x1 += 1;
  }

  const positives = allPoints.filter((p) => p.y > 0).map((p) => p.y);
  let y0: number;
  let y1: number;
  if (options.logY) {
    y0 = positives.length ? Math.min(...positives) : 1;
    y1 = positives.length ? Math.max(...positives) : 10;
    if (y0 === y1) {
      y0 /= 2;
      y1 *= 2;
    }
  } else {
    y0 = 0;
    y1 = allPoints.length ? Math.max(...allPoints.map((p) => p.y)) : 1;
    if (y1 <= y0) {
      y1 = y0 + 1;
    }
    y1 *= 1.05;
  }

  const sx = (x: number) => MARGIN.left + ((x - x0) / (x1 - x0)) * plotW;
  const sy = (y: number) => {
    const t = options.logY
      ? (Math.log10(y) - Math.log10(y0)) / (Math.log10(y1) - Math.log10(y0))
      : (y - y0) / (y1 - y0);
    return MARGIN.top + plotH - t * plotH;
  };

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="22" text-anchor="middle" font-size="15">` +
      `${escapeXml(options.title)}</text>`,
  );

  const xTicks = niceTicks(x0, x1);
  const yTicks = options.logY ? logTicks(y0, y1) : niceTicks(y0, y1);
  for (const t of xTicks) {
    const x = sx(t);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" y2="${MARGIN.top + plotH}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(x)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-size="11">` +
        `${fmt(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const y = sy(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" y2="${fmt(y)}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 6}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">` +
        `${fmt(t)}</text>`,
    );
  }

  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333333"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle" ` +
      `font-size="13">${escapeXml(options.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${escapeXml(options.yLabel)}</text>`,
  );

  seriesList.forEach((series, idx) => {
    const pts = series.points
      .filter((p) => !options.logY || p.y > 0)
      .map((p) => ({ x: sx(p.x), y: sy(p.y) }));
    if (pts.length >= 2) {
      const path = pts.map((p) => `${fmt(p.x)},${fmt(p.y)}`).join(" ");
      parts.push(
        `<polyline points="${path}" fill="none" stroke="${series.color}" ` +
          `stroke-width="2" stroke-dasharray="${series.dash}"/>`,
      );
    }
    for (const p of pts) {
      parts.push(
        `<circle cx="${fmt(p.x)}" cy="${fmt(p.y)}" r="3" fill="${series.color}"/>`,
      );
    }
    const ly = MARGIN.top + 14 + idx * 18;
    const lx = MARGIN.left + plotW + 12;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 26}" y2="${ly - 4}" ` +
        `stroke="${series.color}" stroke-width="2" stroke-dasharray="${series.dash}"/>`,
    );
    parts.push(
      `<text x="${lx + 32}" y="${ly}" font-size="11">${escapeXml(series.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

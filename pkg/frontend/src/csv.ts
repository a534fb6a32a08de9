/** Strict reader for the simulator's aggregated sweep CSV. */

export interface SweepRow {
  scheme: string;
  csi: string;
  bf: string;
  direction: string;
  power_dbw: number;
  mean_rate_mbps: number;
  std_rate_mbps: number;
  trials: number;
  seed: number;
}

export const REQUIRED_COLUMNS = [
  "scheme",
  "csi",
  "bf",
  "direction",
  "power_dbw",
  "mean_rate_mbps",
  "std_rate_mbps",
  "trials",
  "seed",
] as const;

const NUMERIC_COLUMNS = new Set([
  "power_dbw",
  "mean_rate_mbps",
  "std_rate_mbps",
  "trials",
  "seed",
]);

export class SchemaError extends Error {}

/** Parse CSV text; the header must carry every required column. */
export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV: missing header row");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const index = new Map<string, number>();
  header.forEach((name, i) => index.set(name, i));
  const missing = REQUIRED_COLUMNS.filter((c) => !index.has(c));
  if (missing.length > 0) {
    throw new SchemaError(`missing required columns: ${missing.join(", ")}`);
  }

  const rows: SweepRow[] = [];
  for (let lineNo = 1; lineNo < lines.length; lineNo++) {
    const fields = lines[lineNo].split(",");
    if (fields.length < header.length) {
      throw new SchemaError(`row ${lineNo + 1}: expected ${header.length} fields, got ${fields.length}`);
    }
    const row: Record<string, string | number> = {};
    for (const column of REQUIRED_COLUMNS) {
      const raw = fields[index.get(column)!].trim();
      if (NUMERIC_COLUMNS.has(column)) {
        const value = Number(raw);
        if (!Number.isFinite(value)) {
          throw new SchemaError(`row ${lineNo + 1}: column ${column} is not numeric: ${raw}`);
        }
        row[column] = value;
      } else {
        row[column] = raw;
      }
    }
    rows.push(row as unknown as SweepRow);
  }
  return rows;
}

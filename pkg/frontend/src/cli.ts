#!/usr/bin/env node
/** plot --csv <path> --direction DL|UL --out <path> [--k-label text] [--log-y] */

import { render } from "./figure.js";
import { SchemaError } from "./csv.js";

function usage(): string {
  return "usage: plot --csv <path> --direction DL|UL --out <path> [--k-label <text>] [--log-y]";
}

export function parseArgs(argv: string[]): {
  csv?: string;
  direction?: string;
  out?: string;
  kLabel?: string;
  logY: boolean;
} {
  const parsed: { csv?: string; direction?: string; out?: string; kLabel?: string; logY: boolean } =
    { logY: false };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    switch (arg) {
      case "--csv":
        parsed.csv = argv[++i];
        break;
      case "--direction":
        parsed.direction = argv[++i];
        break;
      case "--out":
        parsed.out = argv[++i];
        break;
      case "--k-label":
        parsed.kLabel = argv[++i];
        break;
      case "--log-y":
        parsed.logY = true;
        break;
      default:
        throw new Error(`unknown argument: ${arg}\n${usage()}`);
    }
  }
  return parsed;
}

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  if (!args.csv || !args.out || (args.direction !== "DL" && args.direction !== "UL")) {
    console.error(usage());
    return 2;
  }
  try {
    render({
      csvPath: args.csv,
      direction: args.direction,
      outPath: args.out,
      kLabel: args.kLabel,
      logY: args.logY,
    });
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 1;
    }
    console.error(String(err));
    return 1;
  }
  console.log(`wrote ${args.out}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  (process.argv[1].endsWith("cli.js") || process.argv[1].endsWith("plot"));
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}

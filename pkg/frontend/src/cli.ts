#!/usr/bin/env node
/**
 * Panel rendering for reconstruction JSON documents.
 *
 *   nqptomo-plots render-matrix --field field.json --out panels/ [--threshold 5]
 *   nqptomo-plots render-comparison --input comparison.json --out grid.png
 *
 * Exit codes: 0 success, 1 usage error, 2 data error.
 */

import { DEFAULT_COLORMAP, parseColor } from "./colormap.js";
import { DataError, loadComparison, loadField } from "./field.js";
import { DEFAULT_RENDER, RenderOptions, renderComparison, renderMatrixPanels } from "./render.js";

class UsageError extends Error {}

function parseArgs(argv: string[]): { command: string; flags: Map<string, string> } {
  if (argv.length === 0) throw new UsageError("missing command");
  const [command, ...rest] = argv;
  const flags = new Map<string, string>();
  for (let i = 0; i < rest.length; i++) {
    const token = rest[i];
    if (!token.startsWith("--")) throw new UsageError(`unexpected argument ${token}`);
    const eq = token.indexOf("=");
    if (eq >= 0) {
      flags.set(token.slice(2, eq), token.slice(eq + 1));
    } else {
      const value = rest[i + 1];
      if (value === undefined) throw new UsageError(`flag ${token} needs a value`);
      flags.set(token.slice(2), value);
      i++;
    }
  }
  return { command, flags };
}

function renderOptions(flags: Map<string, string>): RenderOptions {
  const opts: RenderOptions = {
    ...DEFAULT_RENDER,
    colormap: { ...DEFAULT_COLORMAP },
  };
  if (flags.has("threshold")) {
    const t = Number(flags.get("threshold"));
    if (!Number.isFinite(t) || t < 0) throw new UsageError("bad --threshold");
    opts.threshold = t;
  }
  if (flags.has("cell")) {
    const c = Number(flags.get("cell"));
    if (!Number.isInteger(c) || c < 1) throw new UsageError("bad --cell");
    opts.cellSize = c;
  }
  if (flags.has("positive-color")) opts.colormap.positive = parseColor(flags.get("positive-color")!);
  if (flags.has("negative-color")) opts.colormap.negative = parseColor(flags.get("negative-color")!);
  return opts;
}

function need(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (!v) throw new UsageError(`--${name} is required`);
  return v;
}

export function main(argv: string[]): number {
  try {
    const { command, flags } = parseArgs(argv);
    const opts = renderOptions(flags);
    if (command === "render-matrix") {
      const doc = loadField(need(flags, "field"));
      const result = renderMatrixPanels(doc, need(flags, "out"), opts);
      for (const w of result.warnings) console.error(`warning: ${w}`);
      for (const f of result.files) console.log(f);
      return 0;
    }
    if (command === "render-comparison") {
      const doc = loadComparison(need(flags, "input"));
      const out = need(flags, "out");
      renderComparison(doc, out, opts);
      console.log(out);
      return 0;
    }
    throw new UsageError(`unknown command ${command}`);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 1;
    }
    if (err instanceof DataError || (err as NodeJS.ErrnoException)?.code === "ENOENT") {
      console.error(`data error: ${(err as Error).message}`);
      return 2;
    }
    if (err instanceof SyntaxError) {
      console.error(`data error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}

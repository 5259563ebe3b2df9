/**
 * Loaders for the reconstruction pipeline's JSON documents: matrix fields
 * (sampled or analytic) and Wigner vs filtered-P comparison tables.
 */

import { readFileSync } from "node:fs";

export interface GridSpec {
  re_min: number;
  re_max: number;
  im_min: number;
  im_max: number;
  n_re: number;
  n_im: number;
}

export interface FieldDoc {
  grid: GridSpec;
  w: number;
  d: number;
  /** [n_re][n_im][d][d][2] (re, im pairs) */
  matrices: number[][][][][];
  /** [n_re][n_im][d][d] */
  errors: number[][][][];
  significance?: unknown;
  oracle?: boolean;
}

export interface ComparisonRow {
  beta: number;
  wigner_min: number;
  wigner_max: number;
  p_min: number;
  p_max: number;
  wigner_neg_ratio: number;
  p_neg_ratio: number;
}

export interface ComparisonDoc {
  grid: GridSpec;
  w: number;
  betas: number[];
  rows: ComparisonRow[];
  /** per beta: [n_re][n_im] */
  wigner: number[][][];
  p_filtered: number[][][];
}

export class DataError extends Error {}

function checkGrid(grid: unknown): GridSpec {
  const g = grid as GridSpec;
  for (const key of ["re_min", "re_max", "im_min", "im_max", "n_re", "n_im"] as const) {
    if (typeof g?.[key] !== "number") {
      throw new DataError(`grid is missing numeric field ${key}`);
    }
  }
  if (g.n_re < 2 || g.n_im < 2) throw new DataError("grid too small");
  return g;
}

export function parseField(doc: unknown): FieldDoc {
  const f = doc as FieldDoc;
  const grid = checkGrid(f?.grid);
  if (typeof f.w !== "number" || typeof f.d !== "number") {
    throw new DataError("field document needs numeric w and d");
  }
  if (!Array.isArray(f.matrices) || f.matrices.length !== grid.n_re) {
    throw new DataError("matrices do not match the grid");
  }
  const probe = f.matrices[0]?.[0];
  if (!Array.isArray(probe) || probe.length !== f.d ||
      !Array.isArray(probe[0]) || probe[0].length !== f.d ||
      !Array.isArray(probe[0][0]) || probe[0][0].length !== 2) {
    throw new DataError("matrices must be [n_re][n_im][d][d][2] nested lists");
  }
  if (!Array.isArray(f.errors) || f.errors.length !== grid.n_re) {
    throw new DataError("errors do not match the grid");
  }
  return f;
}

export function loadField(path: string): FieldDoc {
  return parseField(JSON.parse(readFileSync(path, "utf8")));
}

export function parseComparison(doc: unknown): ComparisonDoc {
  const c = doc as ComparisonDoc;
  checkGrid(c?.grid);
  if (!Array.isArray(c.betas) || c.betas.length === 0) {
    throw new DataError("comparison document needs a nonempty beta list");
  }
  if (!Array.isArray(c.wigner) || c.wigner.length !== c.betas.length ||
      !Array.isArray(c.p_filtered) || c.p_filtered.length !== c.betas.length) {
    throw new DataError("comparison arrays do not match the beta list");
  }
  return c;
}

export function loadComparison(path: string): ComparisonDoc {
  return parseComparison(JSON.parse(readFileSync(path, "utf8")));
}

export interface ElementMaps {
  re: number[][];
  im: number[][];
  sigma: number[][];
}

/** Extract one (m, n) element of the field as plain 2-D maps. */
export function elementMaps(doc: FieldDoc, m: number, n: number): ElementMaps {
  if (m < 0 || n < 0 || m >= doc.d || n >= doc.d) {
    throw new DataError(`element (${m}, ${n}) out of range for d=${doc.d}`);
  }
  const re: number[][] = [];
  const im: number[][] = [];
  const sigma: number[][] = [];
  for (let i = 0; i < doc.grid.n_re; i++) {
    re.push(doc.matrices[i].map((cell) => cell[m][n][0]));
    im.push(doc.matrices[i].map((cell) => cell[m][n][1]));
    sigma.push(doc.errors[i].map((cell) => cell[m][n]));
  }
  return { re, im, sigma };
}

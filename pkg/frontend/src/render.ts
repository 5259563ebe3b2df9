/**
 * Heatmap rasterization of phase-space maps and panel composition.
 *
 * Values are drawn with Re(alpha) along x and Im(alpha) upward, one
 * `cellSize`-pixel square per grid point, each panel normalized by its own
 * largest |value|. Cells whose |value|/sigma falls below the significance
 * threshold are masked out (analytic fields carry no errors, so masking is
 * skipped there with a warning).
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { ColormapOptions, DEFAULT_COLORMAP, divergingColor } from "./colormap.js";
import { ComparisonDoc, DataError, ElementMaps, FieldDoc, elementMaps } from "./field.js";
import { encodePng } from "./png.js";

export interface RenderOptions {
  cellSize: number;
  threshold: number;
  colormap: ColormapOptions;
  separator: number; // pixels between sub-panels
}

export const DEFAULT_RENDER: RenderOptions = {
  cellSize: 6,
  threshold: 5,
  colormap: DEFAULT_COLORMAP,
  separator: 2,
};

export interface Raster {
  pixels: Uint8Array; // RGB
  width: number;
  height: number;
}

/** Rasterize one map; `mask[i][j]` true hides the cell. */
export function rasterizeMap(
  values: number[][],
  mask: boolean[][] | null,
  scale: number,
  opts: RenderOptions,
): Raster {
  const nRe = values.length;
  const nIm = values[0].length;
  const width = nRe * opts.cellSize;
  const height = nIm * opts.cellSize;
  const pixels = new Uint8Array(width * height * 3);
  for (let i = 0; i < nRe; i++) {
    for (let j = 0; j < nIm; j++) {
      const hidden = mask !== null && mask[i][j];
      const color = hidden
        ? opts.colormap.mask
        : divergingColor(scale > 0 ? values[i][j] / scale : 0, opts.colormap);
      for (let px = 0; px < opts.cellSize; px++) {
        for (let py = 0; py < opts.cellSize; py++) {
          const x = i * opts.cellSize + px;
          const y = (nIm - 1 - j) * opts.cellSize + py; // Im upward
          const idx = (y * width + x) * 3;
          pixels[idx] = color[0];
          pixels[idx + 1] = color[1];
          pixels[idx + 2] = color[2];
        }
      }
    }
  }
  return { pixels, width, height };
}

/** Compose rasters into a rows x cols grid with separator pixels. */
export function composeGrid(cells: Raster[][], separator: number): Raster {
  const rows = cells.length;
  const cols = cells[0].length;
  const cellW = cells[0][0].width;
  const cellH = cells[0][0].height;
  const width = cols * cellW + (cols - 1) * separator;
  const height = rows * cellH + (rows - 1) * separator;
  const pixels = new Uint8Array(width * height * 3);
  pixels.fill(64); // separator color
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const cell = cells[r][c];
      if (cell.width !== cellW || cell.height !== cellH) {
        throw new DataError("panel cells must share dimensions");
      }
      const x0 = c * (cellW + separator);
      const y0 = r * (cellH + separator);
      for (let y = 0; y < cellH; y++) {
        const src = cell.pixels.subarray(y * cellW * 3, (y + 1) * cellW * 3);
        pixels.set(src, ((y0 + y) * width + x0) * 3);
      }
    }
  }
  return { pixels, width, height };
}

function maxAbs(maps: number[][][]): number {
  let best = 0;
  for (const map of maps) {
    for (const row of map) {
      for (const v of row) best = Math.max(best, Math.abs(v));
    }
  }
  return best;
}

function significanceMask(
  values: number[][],
  sigma: number[][],
  threshold: number,
): boolean[][] {
  return values.map((row, i) =>
    row.map((v, j) => Math.abs(v) < threshold * sigma[i][j]),
  );
}

export interface PanelResult {
  files: string[];
  warnings: string[];
}

/**
 * One image per matrix element (m <= n): diagonal panels show the (real)
 * element, off-diagonal panels show real and imaginary parts side by side.
 */
export function renderMatrixPanels(
  doc: FieldDoc,
  outDir: string,
  opts: RenderOptions = DEFAULT_RENDER,
): PanelResult {
  mkdirSync(outDir, { recursive: true });
  const warnings: string[] = [];
  let threshold = opts.threshold;
  const noErrors =
    doc.oracle === true ||
    doc.errors.every((plane) => plane.every((cell) => cell.every((row) => row.every((v) => v === 0))));
  if (noErrors && threshold > 0) {
    warnings.push("field carries no sampling errors; significance threshold ignored");
    threshold = 0;
  }
  const files: string[] = [];
  for (let m = 0; m < doc.d; m++) {
    for (let n = m; n < doc.d; n++) {
      const el: ElementMaps = elementMaps(doc, m, n);
      const parts: Raster[] = [];
      const scale = m === n ? maxAbs([el.re]) : maxAbs([el.re, el.im]);
      const maps = m === n ? [el.re] : [el.re, el.im];
      for (const map of maps) {
        const mask = threshold > 0 ? significanceMask(map, el.sigma, threshold) : null;
        parts.push(rasterizeMap(map, mask, scale, opts));
      }
      const raster = composeGrid([parts], opts.separator);
      const path = join(outDir, `panel_m${m}_n${n}.png`);
      writeFileSync(path, encodePng(raster.pixels, raster.width, raster.height));
      files.push(path);
    }
  }
  return { files, warnings };
}

/** Two-row grid (Wigner on top, filtered P below), one column per beta. */
export function renderComparison(
  doc: ComparisonDoc,
  outPath: string,
  opts: RenderOptions = DEFAULT_RENDER,
): Raster {
  const top: Raster[] = [];
  const bottom: Raster[] = [];
  for (let k = 0; k < doc.betas.length; k++) {
    top.push(rasterizeMap(doc.wigner[k], null, maxAbs([doc.wigner[k]]), opts));
    bottom.push(rasterizeMap(doc.p_filtered[k], null, maxAbs([doc.p_filtered[k]]), opts));
  }
  const raster = composeGrid([top, bottom], opts.separator);
  writeFileSync(outPath, encodePng(raster.pixels, raster.width, raster.height));
  return raster;
}

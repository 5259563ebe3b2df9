/**
 * Diverging colormap for signed quasiprobability values: green for
 * positive, red for negative, white at zero, with a neutral gray for
 * masked (insignificant) cells. Endpoint colors are configurable.
 */

export type RGB = [number, number, number];

export interface ColormapOptions {
  positive: RGB;
  negative: RGB;
  zero: RGB;
  mask: RGB;
}

export const DEFAULT_COLORMAP: ColormapOptions = {
  positive: [0, 120, 40], // green
  negative: [178, 24, 30], // red
  zero: [255, 255, 255],
  mask: [225, 225, 225],
};

function lerp(a: number, b: number, t: number): number {
  return Math.round(a + (b - a) * t);
}

function mix(from: RGB, to: RGB, t: number): RGB {
  return [lerp(from[0], to[0], t), lerp(from[1], to[1], t), lerp(from[2], to[2], t)];
}

/**
 * Map a normalized value in [-1, 1] to a color; values outside the range
 * clamp to the endpoints. NaN renders as the mask color.
 */
export function divergingColor(
  t: number,
  options: ColormapOptions = DEFAULT_COLORMAP,
): RGB {
  if (Number.isNaN(t)) return options.mask;
  const c = Math.max(-1, Math.min(1, t));
  return c >= 0
    ? mix(options.zero, options.positive, c)
    : mix(options.zero, options.negative, -c);
}

export function parseColor(spec: string): RGB {
  const m = /^#?([0-9a-fA-F]{6})$/.exec(spec.trim());
  if (!m) throw new Error(`bad color ${JSON.stringify(spec)}; expected RRGGBB hex`);
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

/**
 * Portrait parameters exposed in the UI, with the same ranges the HTTP API
 * enforces server-side. Everything sent over the wire goes through
 * clampParams first, so an out-of-range slider or a stale saved value can
 * never produce a 400.
 */

export type PageSize = "a5" | "a4";

export interface PortraitParams {
  kernelSize: number;
  lowThreshold: number;
  highThreshold: number;
  colors: number;
  strokeSize: number;
  strokeCount: number;
  page: PageSize;
}

export const DEFAULT_PARAMS: PortraitParams = {
  kernelSize: 5,
  lowThreshold: 0.1,
  highThreshold: 0.3,
  colors: 4,
  strokeSize: 6,
  strokeCount: 400,
  page: "a5",
};

export const LIMITS = {
  kernelSize: { min: 3, max: 15 },
  lowThreshold: { min: 0.01, max: 0.97 },
  highThreshold: { min: 0.02, max: 0.98 },
  colors: { min: 1, max: 8 },
  strokeSize: { min: 2, max: 15 },
  strokeCount: { min: 0, max: 1500 },
} as const;

const PAGES: Record<PageSize, { width: number; height: number }> = {
  a5: { width: 148, height: 210 },
  a4: { width: 210, height: 297 },
};

function clamp(value: number, min: number, max: number): number {
  if (!Number.isFinite(value)) return min;
  return Math.min(max, Math.max(min, value));
}

export function clampParams(raw: PortraitParams): PortraitParams {
  let kernel = Math.round(clamp(raw.kernelSize, LIMITS.kernelSize.min, LIMITS.kernelSize.max));
  if (kernel % 2 === 0) kernel += 1;

  let low = clamp(raw.lowThreshold, LIMITS.lowThreshold.min, LIMITS.lowThreshold.max);
  let high = clamp(raw.highThreshold, LIMITS.highThreshold.min, LIMITS.highThreshold.max);
  // The detector requires low < high strictly.
  if (low >= high) low = Math.max(LIMITS.lowThreshold.min, high - 0.01);

  return {
    kernelSize: kernel,
    lowThreshold: low,
    highThreshold: high,
    colors: Math.round(clamp(raw.colors, LIMITS.colors.min, LIMITS.colors.max)),
    strokeSize: clamp(raw.strokeSize, LIMITS.strokeSize.min, LIMITS.strokeSize.max),
    strokeCount: Math.round(clamp(raw.strokeCount, LIMITS.strokeCount.min, LIMITS.strokeCount.max)),
    page: raw.page === "a4" ? "a4" : "a5",
  };
}

/** Query string for POST /preview. */
export function previewQuery(params: PortraitParams): string {
  const p = clampParams(params);
  const q = new URLSearchParams({
    kernel_size: String(p.kernelSize),
    low_threshold: p.lowThreshold.toFixed(3),
    high_threshold: p.highThreshold.toFixed(3),
  });
  return q.toString();
}

/** Nested config object for POST /portraits. */
export function portraitConfig(params: PortraitParams): Record<string, unknown> {
  const p = clampParams(params);
  const page = PAGES[p.page];
  return {
    canny: {
      kernel_size: p.kernelSize,
      low_threshold: p.lowThreshold,
      high_threshold: p.highThreshold,
    },
    n_colors: p.colors,
    shading: {
      stroke_size: p.strokeSize,
      count_target: p.strokeCount,
    },
    page: { width: page.width, height: page.height },
  };
}

import type { Histogram } from './types.js';

/** One renderable histogram bar; counts are the endpoint's, untouched. */
export interface HistogramBar {
  x0: number;
  x1: number;
  count: number;
  /** height as a fraction of the tallest bar, in [0, 1] */
  height: number;
}

export function histogramBars(histogram: Histogram): HistogramBar[] {
  const { edges, counts } = histogram;
  if (edges.length !== counts.length + 1) {
    throw new Error(
      `histogram shape mismatch: ${edges.length} edges for ${counts.length} counts`,
    );
  }
  const peak = Math.max(...counts, 1);
  return counts.map((count, i) => ({
    x0: edges[i],
    x1: edges[i + 1],
    count,
    height: count / peak,
  }));
}

/** Shared figure geometry, axis scales, and the color cycle. */

export const WIDTH = 800;
export const HEIGHT = 500;
export const MARGIN = { left: 80, right: 24, top: 32, bottom: 56 } as const;

export const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
export const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

// fixed palette so identical inputs always render identical bytes
export const COLORS = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

export type AxisScale = "linear" | "log";

export interface Scale {
  (v: number): number;
  domain: [number, number];
  kind: AxisScale;
}

/** Map [lo, hi] onto pixel rows top..top+height with hi at the top. */
export function makeYScale(lo: number, hi: number, kind: AxisScale): Scale {
  if (kind === "log") {
    if (lo <= 0) throw new Error(`log scale needs positive values, got ${lo}`);
    const llo = Math.log10(lo);
    const lhi = Math.log10(hi);
    const span = lhi - llo || 1;
    const f = (v: number) =>
      MARGIN.top + PLOT_H - ((Math.log10(v) - llo) / span) * PLOT_H;
    return Object.assign(f, { domain: [lo, hi] as [number, number], kind });
  }
  const span = hi - lo || 1;
  const f = (v: number) => MARGIN.top + PLOT_H - ((v - lo) / span) * PLOT_H;
  return Object.assign(f, { domain: [lo, hi] as [number, number], kind });
}

export function makeXScale(lo: number, hi: number): (v: number) => number {
  const span = hi - lo || 1;
  return (v: number) => MARGIN.left + ((v - lo) / span) * PLOT_W;
}

export function yTicks(scale: Scale, count = 6): number[] {
  const [lo, hi] = scale.domain;
  if (scale.kind === "log") {
    const ticks: number[] = [];
    const lo10 = Math.ceil(Math.log10(lo));
    const hi10 = Math.floor(Math.log10(hi));
    for (let e = lo10; e <= hi10; e++) ticks.push(10 ** e);
    if (ticks.length === 0) ticks.push(lo, hi);
    return ticks;
  }
  const step = (hi - lo) / (count - 1) || 1;
  return Array.from({ length: count }, (_, i) => lo + i * step);
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return String(Number(v.toPrecision(4)));
  }
  return v.toExponential(1);
}

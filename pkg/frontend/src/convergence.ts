/** Convergence figures: one line per algorithm, improvement vs update index. */

import { ConvergenceRow } from "./csv.js";
import {
  AxisScale,
  COLORS,
  HEIGHT,
  MARGIN,
  PLOT_H,
  PLOT_W,
  WIDTH,
  fmtTick,
  makeXScale,
  makeYScale,
  yTicks,
} from "./layout.js";
import { document, el, px } from "./svg.js";

export type ConvergenceStat = "median" | "mean";

export function renderConvergence(
  rows: ConvergenceRow[],
  stat: ConvergenceStat,
  scaleKind: AxisScale = "linear",
): string {
  if (rows.length === 0) throw new Error("convergence input has no rows");
  const algorithms = [...new Set(rows.map((r) => r.algorithm))].sort();
  const iterations = [...new Set(rows.map((r) => r.iteration))].sort((a, b) => a - b);
  if (iterations.length === 0) throw new Error("empty iteration range");

  const pick = (r: ConvergenceRow) => (stat === "median" ? r.medianI : r.meanI);
  let values = rows.map(pick);
  if (scaleKind === "log") {
    const positive = values.filter((v) => v > 0);
    if (positive.length === 0) throw new Error("log scale needs at least one positive value");
    const floor = Math.min(...positive) / 10; // zeros sit at a visible floor
    values = values.map((v) => Math.max(v, floor));
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const y = makeYScale(lo, hi, scaleKind);
  const x = makeXScale(iterations[0], iterations[iterations.length - 1]);

  const children: string[] = [];
  children.push(axes(y, x, iterations, stat));

  algorithms.forEach((algo, i) => {
    const series = rows
      .filter((r) => r.algorithm === algo)
      .sort((a, b) => a.iteration - b.iteration);
    const pts = series
      .map((r) => {
        let v = pick(r);
        if (scaleKind === "log") v = Math.max(v, y.domain[0]);
        return `${px(x(r.iteration))},${px(y(v))}`;
      })
      .join(" ");
    children.push(
      el("polyline", {
        points: pts,
        fill: "none",
        stroke: COLORS[i % COLORS.length],
        "stroke-width": 2,
        "data-algorithm": algo,
      }),
    );
    // legend entry
    const ly = MARGIN.top + 16 + i * 18;
    const lx = MARGIN.left + PLOT_W - 150;
    children.push(
      el("line", {
        x1: px(lx), y1: px(ly - 4), x2: px(lx + 26), y2: px(ly - 4),
        stroke: COLORS[i % COLORS.length], "stroke-width": 2,
      }),
    );
    children.push(
      el("text", { x: px(lx + 32), y: px(ly), "font-size": 13 }, [], algo),
    );
  });

  return document(WIDTH, HEIGHT, children);
}

function axes(y: ReturnType<typeof makeYScale>, x: (v: number) => number, iterations: number[], stat: ConvergenceStat): string {
  const parts: string[] = [];
  const bottom = MARGIN.top + PLOT_H;
  parts.push(el("line", { x1: MARGIN.left, y1: MARGIN.top, x2: MARGIN.left, y2: bottom, stroke: "#000" }));
  parts.push(el("line", { x1: MARGIN.left, y1: bottom, x2: MARGIN.left + PLOT_W, y2: bottom, stroke: "#000" }));
  for (const t of yTicks(y)) {
    const yy = y(t);
    parts.push(el("line", { x1: MARGIN.left - 5, y1: px(yy), x2: MARGIN.left, y2: px(yy), stroke: "#000" }));
    parts.push(
      el("text", { x: MARGIN.left - 9, y: px(yy + 4), "font-size": 12, "text-anchor": "end" }, [], fmtTick(t)),
    );
  }
  for (const it of iterations) {
    const xx = x(it);
    parts.push(el("line", { x1: px(xx), y1: bottom, x2: px(xx), y2: bottom + 5, stroke: "#000" }));
    parts.push(
      el("text", { x: px(xx), y: bottom + 20, "font-size": 12, "text-anchor": "middle" }, [], String(it)),
    );
  }
  parts.push(
    el(
      "text",
      { x: MARGIN.left + PLOT_W / 2, y: HEIGHT - 12, "font-size": 14, "text-anchor": "middle" },
      [],
      "update",
    ),
  );
  parts.push(
    el(
      "text",
      {
        x: 20, y: MARGIN.top + PLOT_H / 2, "font-size": 14, "text-anchor": "middle",
        transform: `rotate(-90 20 ${MARGIN.top + PLOT_H / 2})`,
      },
      [],
      `${stat} improvement`,
    ),
  );
  return parts.join("");
}

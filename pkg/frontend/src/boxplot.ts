/** Boxplot figures drawn verbatim from precomputed statistics.
 *
 * The harness is the single statistical authority: boxes, whiskers,
 * outliers, and the mean marker are positioned from the CSV values with no
 * recomputation here. Each box group carries the source numbers as data
 * attributes, echoed exactly as they appear in the file.
 */

import { BoxplotRow } from "./csv.js";
import {
  AxisScale,
  HEIGHT,
  MARGIN,
  PLOT_H,
  PLOT_W,
  WIDTH,
  fmtTick,
  makeYScale,
  yTicks,
} from "./layout.js";
import { document, el, px } from "./svg.js";

export function renderBoxplot(rows: BoxplotRow[], metric: string, scaleKind: AxisScale = "linear"): string {
  const selected = rows.filter((r) => r.metric === metric).sort((a, b) => (a.algorithm < b.algorithm ? -1 : 1));
  if (selected.length === 0) {
    throw new Error(`no rows with metric ${JSON.stringify(metric)} in the boxplot input`);
  }
  let values = selected.flatMap((r) => [r.whiskerLow, r.whiskerHigh, r.mean, ...r.outliers]);
  if (scaleKind === "log") values = values.filter((v) => v > 0);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const pad = scaleKind === "log" ? [lo / 1.5, hi * 1.5] : [lo - 0.05 * (hi - lo || 1), hi + 0.05 * (hi - lo || 1)];
  const y = makeYScale(pad[0], pad[1], scaleKind);

  const slot = PLOT_W / selected.length;
  const boxW = Math.min(60, slot * 0.5);
  const children: string[] = [];
  const bottom = MARGIN.top + PLOT_H;

  children.push(el("line", { x1: MARGIN.left, y1: MARGIN.top, x2: MARGIN.left, y2: bottom, stroke: "#000" }));
  children.push(el("line", { x1: MARGIN.left, y1: bottom, x2: MARGIN.left + PLOT_W, y2: bottom, stroke: "#000" }));
  for (const t of yTicks(y)) {
    const yy = y(t);
    children.push(el("line", { x1: MARGIN.left - 5, y1: px(yy), x2: MARGIN.left, y2: px(yy), stroke: "#000" }));
    children.push(
      el("text", { x: MARGIN.left - 9, y: px(yy + 4), "font-size": 12, "text-anchor": "end" }, [], fmtTick(t)),
    );
  }

  selected.forEach((row, i) => {
    const cx = MARGIN.left + slot * (i + 0.5);
    const left = cx - boxW / 2;
    const parts: string[] = [];
    // whisker stems and caps
    parts.push(el("line", { x1: px(cx), y1: px(y(row.whiskerHigh)), x2: px(cx), y2: px(y(row.q3)), stroke: "#000" }));
    parts.push(el("line", { x1: px(cx), y1: px(y(row.q1)), x2: px(cx), y2: px(y(row.whiskerLow)), stroke: "#000" }));
    for (const w of [row.whiskerLow, row.whiskerHigh]) {
      parts.push(el("line", { x1: px(cx - boxW / 4), y1: px(y(w)), x2: px(cx + boxW / 4), y2: px(y(w)), stroke: "#000" }));
    }
    // the box: top edge at q3, bottom edge at q1
    parts.push(
      el("rect", {
        x: px(left),
        y: px(y(row.q3)),
        width: px(boxW),
        height: px(y(row.q1) - y(row.q3)),
        fill: "#9ecae1",
        stroke: "#000",
      }),
    );
    parts.push(
      el("line", {
        x1: px(left), y1: px(y(row.median)), x2: px(left + boxW), y2: px(y(row.median)),
        stroke: "#000", "stroke-width": 2,
      }),
    );
    // the circle marks the mean
    parts.push(el("circle", { cx: px(cx), cy: px(y(row.mean)), r: 4, fill: "none", stroke: "#000" }));
    for (const o of row.outliers) {
      const oy = y(scaleKind === "log" ? Math.max(o, y.domain[0]) : o);
      parts.push(el("line", { x1: px(cx - 4), y1: px(oy - 4), x2: px(cx + 4), y2: px(oy + 4), stroke: "#000" }));
      parts.push(el("line", { x1: px(cx - 4), y1: px(oy + 4), x2: px(cx + 4), y2: px(oy - 4), stroke: "#000" }));
    }
    children.push(
      el(
        "g",
        {
          "data-algorithm": row.algorithm,
          "data-q1": row.raw.q1,
          "data-median": row.raw.median,
          "data-q3": row.raw.q3,
        },
        parts,
      ),
    );
    children.push(
      el("text", { x: px(cx), y: bottom + 20, "font-size": 12, "text-anchor": "middle" }, [], row.algorithm),
    );
  });

  children.push(
    el(
      "text",
      { x: MARGIN.left + PLOT_W / 2, y: HEIGHT - 12, "font-size": 14, "text-anchor": "middle" },
      [],
      metric,
    ),
  );
  return document(WIDTH, HEIGHT, children);
}

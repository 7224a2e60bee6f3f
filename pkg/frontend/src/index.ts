import { readFileSync, writeFileSync } from "node:fs";

import { parseBoxplotCsv, parseConvergenceCsv } from "./csv.js";
import { renderBoxplot } from "./boxplot.js";
import { renderConvergence } from "./convergence.js";
import { AxisScale } from "./layout.js";

export { parseBoxplotCsv, parseConvergenceCsv } from "./csv.js";
export { renderBoxplot } from "./boxplot.js";
export { renderConvergence } from "./convergence.js";
export { makeYScale, MARGIN, PLOT_H, PLOT_W, WIDTH, HEIGHT } from "./layout.js";
export type { AxisScale } from "./layout.js";

export const FIGURE_KINDS = [
  "convergence-median",
  "convergence-mean",
  "final-boxplot",
  "rmse-boxplot",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface PlotJob {
  kind: FigureKind;
  input: string;
  output: string;
  scale: AxisScale;
}

export function renderJob(job: PlotJob): void {
  const text = readFileSync(job.input, "utf8");
  let svg: string;
  switch (job.kind) {
    case "convergence-median":
      svg = renderConvergence(parseConvergenceCsv(text, job.input), "median", job.scale);
      break;
    case "convergence-mean":
      svg = renderConvergence(parseConvergenceCsv(text, job.input), "mean", job.scale);
      break;
    case "final-boxplot":
      svg = renderBoxplot(parseBoxplotCsv(text, job.input), "final_improvement", job.scale);
      break;
    case "rmse-boxplot":
      svg = renderBoxplot(parseBoxplotCsv(text, job.input), "validation_rmse", job.scale);
      break;
    default:
      throw new Error(`unknown figure kind ${JSON.stringify(job.kind)}`);
  }
  writeFileSync(job.output, svg, "utf8");
}

#!/usr/bin/env node
/** krigego-plot --kind <figure> --in <summary.csv> --out <figure.svg> [--scale linear|log] */

import { FIGURE_KINDS, FigureKind, PlotJob, renderJob } from "./index.js";
import { AxisScale } from "./layout.js";

function parseArgs(argv: string[]): PlotJob {
  let kind: string | undefined;
  let input: string | undefined;
  let output: string | undefined;
  let scale: string = "linear";
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`missing value for ${a}`);
      return argv[i];
    };
    if (a === "--kind") kind = next();
    else if (a === "--in") input = next();
    else if (a === "--out") output = next();
    else if (a === "--scale") scale = next();
    else throw new Error(`unknown flag ${a}`);
  }
  if (!kind || !input || !output) {
    throw new Error("usage: krigego-plot --kind <kind> --in <csv> --out <svg> [--scale linear|log]");
  }
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new Error(`--kind must be one of ${FIGURE_KINDS.join(", ")}`);
  }
  if (scale !== "linear" && scale !== "log") {
    throw new Error("--scale must be linear or log");
  }
  return { kind: kind as FigureKind, input, output, scale: scale as AxisScale };
}

try {
  renderJob(parseArgs(process.argv.slice(2)));
} catch (err) {
  console.error(`error: ${err instanceof Error ? err.message : err}`);
  process.exit(2);
}

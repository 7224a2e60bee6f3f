/** Strict readers for the benchmark harness's summary CSV schemas. */

export interface ConvergenceRow {
  problem: string;
  algorithm: string;
  iteration: number;
  medianI: number;
  q1I: number;
  q3I: number;
  meanI: number;
}

export interface BoxplotRow {
  problem: string;
  algorithm: string;
  metric: string;
  q1: number;
  median: number;
  q3: number;
  whiskerLow: number;
  whiskerHigh: number;
  mean: number;
  outliers: number[];
  /** verbatim CSV strings, preserved so renders can echo them exactly */
  raw: { q1: string; median: string; q3: string };
}

const CONVERGENCE_HEADER = "problem,algorithm,iteration,median_I,q1_I,q3_I,mean_I";
const BOXPLOT_HEADER =
  "problem,algorithm,metric,q1,median,q3,whisker_low,whisker_high,mean,outliers";

function splitLines(text: string, path: string): string[] {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) throw new Error(`${path}: empty file`);
  return lines;
}

function num(field: string, where: string): number {
  const v = Number(field);
  if (!Number.isFinite(v)) throw new Error(`${where}: not a number: ${JSON.stringify(field)}`);
  return v;
}

export function parseConvergenceCsv(text: string, path = "<convergence>"): ConvergenceRow[] {
  const lines = splitLines(text, path);
  if (lines[0] !== CONVERGENCE_HEADER) {
    throw new Error(`${path}: expected header ${JSON.stringify(CONVERGENCE_HEADER)}, got ${JSON.stringify(lines[0])}`);
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    if (parts.length !== 7) throw new Error(`${path}:${i + 2}: expected 7 fields`);
    return {
      problem: parts[0],
      algorithm: parts[1],
      iteration: num(parts[2], `${path}:${i + 2}`),
      medianI: num(parts[3], `${path}:${i + 2}`),
      q1I: num(parts[4], `${path}:${i + 2}`),
      q3I: num(parts[5], `${path}:${i + 2}`),
      meanI: num(parts[6], `${path}:${i + 2}`),
    };
  });
}

export function parseBoxplotCsv(text: string, path = "<boxplot>"): BoxplotRow[] {
  const lines = splitLines(text, path);
  if (lines[0] !== BOXPLOT_HEADER) {
    throw new Error(`${path}: expected header ${JSON.stringify(BOXPLOT_HEADER)}, got ${JSON.stringify(lines[0])}`);
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    if (parts.length !== 10) throw new Error(`${path}:${i + 2}: expected 10 fields`);
    const where = `${path}:${i + 2}`;
    const outliers = parts[9] === "" ? [] : parts[9].split(";").map((s) => num(s, where));
    return {
      problem: parts[0],
      algorithm: parts[1],
      metric: parts[2],
      q1: num(parts[3], where),
      median: num(parts[4], where),
      q3: num(parts[5], where),
      whiskerLow: num(parts[6], where),
      whiskerHigh: num(parts[7], where),
      mean: num(parts[8], where),
      outliers,
      raw: { q1: parts[3], median: parts[4], q3: parts[5] },
    };
  });
}

/**
 * Typed bindings over the `mbhd` command line.
 *
 * Each call spawns the CLI, points it at a scratch output directory and
 * returns the parsed report document, so every number is exactly what the
 * pipeline itself emitted.  Inputs can be file paths or in-memory objects
 * (which are serialized to the CLI's documented JSON/CSV formats first).
 * CLI failures carry a one-object error JSON on stdout; they surface here
 * as `MbhdError` with the machine-readable code preserved.
 */

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

export interface PmfTable {
  d: number;
  probs: number[];
  order?: "mask-ascending";
}

export type ModelSpec =
  | { kind: "linear_threshold"; w: number[]; b: number }
  | { kind: "truth_table"; values: number[] }
  | { kind: "bool_expr"; expr: string; d?: number };

export interface SampleRows {
  rows: number[][];
  outputs?: number[];
}

export interface DecompositionReport {
  report: "decomposition";
  mode: "exact" | "truncated" | "degenerate";
  cap?: number;
  subsets: number[][];
  beta: number[];
  unidentifiable: number[][];
  version: string;
  config: Record<string, unknown>;
}

export interface SobolEntry {
  subset: number[];
  S: number;
  S_var: number;
  S_cov: number;
}

export interface SensitivityReport {
  report: "sensitivity";
  variance: number;
  sobol: SobolEntry[];
  shapley: number[];
  sobol_sum: number;
  flags: string[];
  sobol_matrix_csv?: string;
  version: string;
  config: Record<string, unknown>;
}

export interface PredictionReport {
  x: number[];
  g_hat: number;
  delta_n: number;
  level: number;
  interval: [number, number];
}

export interface EstimationReport {
  report: "estimation";
  n: number;
  c: number | null;
  subsets: number[][];
  beta_hat: number[];
  mu_hat: number[];
  flags: string[];
  prediction?: PredictionReport;
  version: string;
  config: Record<string, unknown>;
}

export interface ReproduceReport {
  report: "reproduce";
  kind: "perceptron" | "fgm" | "mushroom";
  files: string[];
  version: string;
  config: Record<string, unknown>;
  [key: string]: unknown;
}

export class MbhdError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.name = "MbhdError";
    this.code = code;
  }
}

export interface RunOptions {
  /** Executable to spawn; defaults to $MBHD_BIN or "mbhd" on the PATH. */
  bin?: string;
  /** Keep report files here instead of a throwaway temp directory. */
  outputDir?: string;
}

function resolveBin(opts?: RunOptions): string {
  return opts?.bin ?? process.env.MBHD_BIN ?? "mbhd";
}

function runCli(args: string[], opts: RunOptions | undefined): unknown {
  const scratch =
    opts?.outputDir ?? fs.mkdtempSync(path.join(os.tmpdir(), "mbhd-"));
  try {
    const stdout = execFileSync(resolveBin(opts), [...args, "-o", scratch], {
      encoding: "utf8",
    });
    return JSON.parse(stdout);
  } catch (err) {
    const failure = err as { status?: number; stdout?: string | Buffer };
    if (failure.status && failure.stdout) {
      const payload = JSON.parse(failure.stdout.toString()) as {
        error: string;
        message: string;
      };
      throw new MbhdError(payload.error, payload.message);
    }
    throw err;
  } finally {
    if (!opts?.outputDir) {
      fs.rmSync(scratch, { recursive: true, force: true });
    }
  }
}

function materialize(
  dir: string,
  name: string,
  value: string | object,
  serialize: (v: object) => string,
): string {
  if (typeof value === "string") {
    return value;
  }
  const file = path.join(dir, name);
  fs.writeFileSync(file, serialize(value));
  return file;
}

function pmfJson(pmf: object): string {
  const doc = { order: "mask-ascending", ...(pmf as PmfTable) };
  return JSON.stringify(doc, null, 2) + "\n";
}

function modelJson(model: object): string {
  return JSON.stringify(model, null, 2) + "\n";
}

function samplesCsv(samples: object): string {
  const { rows, outputs } = samples as SampleRows;
  const d = rows[0]?.length ?? 0;
  const header = [...Array(d).keys()].map((i) => `x${i + 1}`);
  if (outputs) header.push("y");
  const lines = [header.join(",")];
  rows.forEach((row, i) => {
    const cells = row.map(String);
    if (outputs) cells.push(String(outputs[i]));
    lines.push(cells.join(","));
  });
  return lines.join("\n") + "\n";
}

function withInputs<T>(
  build: (dir: string) => string[],
  opts: RunOptions | undefined,
): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "mbhd-in-"));
  try {
    return runCli(build(dir), opts) as T;
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

export function decompose(
  pmf: PmfTable | string,
  model: ModelSpec | string,
  opts?: { cap?: number } & RunOptions,
): DecompositionReport {
  return withInputs((dir) => {
    const args = [
      "decompose",
      "--pmf", materialize(dir, "pmf.json", pmf, pmfJson),
      "--model", materialize(dir, "model.json", model, modelJson),
    ];
    if (opts?.cap !== undefined) args.push("--cap", String(opts.cap));
    return args;
  }, opts);
}

export function indices(
  pmf: PmfTable | string,
  model: ModelSpec | string,
  opts?: { cap?: number } & RunOptions,
): SensitivityReport {
  return withInputs((dir) => {
    const args = [
      "indices",
      "--pmf", materialize(dir, "pmf.json", pmf, pmfJson),
      "--model", materialize(dir, "model.json", model, modelJson),
    ];
    if (opts?.cap !== undefined) args.push("--cap", String(opts.cap));
    return args;
  }, opts);
}

export function estimate(
  samples: SampleRows | string,
  opts?: {
    model?: ModelSpec | string;
    pmf?: PmfTable | string;
    cap?: number;
    level?: number;
    predict?: number[];
  } & RunOptions,
): EstimationReport {
  return withInputs((dir) => {
    const args = [
      "estimate",
      "--samples", materialize(dir, "samples.csv", samples, samplesCsv),
    ];
    if (opts?.model !== undefined) {
      args.push("--model", materialize(dir, "model.json", opts.model, modelJson));
    }
    if (opts?.pmf !== undefined) {
      args.push("--pmf", materialize(dir, "pmf.json", opts.pmf, pmfJson));
    }
    if (opts?.cap !== undefined) args.push("--cap", String(opts.cap));
    if (opts?.level !== undefined) args.push("--level", String(opts.level));
    if (opts?.predict !== undefined) args.push("--predict", opts.predict.join(","));
    return args;
  }, opts);
}

export function reproduce(
  which: "perceptron" | "fgm" | "mushroom",
  opts?: { data?: string; nodes?: number; seed?: number } & RunOptions,
): ReproduceReport {
  const args = ["reproduce", which];
  if (opts?.data !== undefined) args.push("--data", opts.data);
  if (opts?.nodes !== undefined) args.push("--nodes", String(opts.nodes));
  if (opts?.seed !== undefined) args.push("--seed", String(opts.seed));
  return runCli(args, opts) as ReproduceReport;
}

/** Coefficients keyed by subset label, e.g. "[1,2]" (empty set is "[]"). */
export function betaBySubset(report: DecompositionReport): Map<string, number> {
  const out = new Map<string, number>();
  report.subsets.forEach((subset, i) => {
    out.set(`[${subset.join(",")}]`, report.beta[i]);
  });
  return out;
}

/** Sobol' indices keyed by subset label. */
export function sobolBySubset(report: SensitivityReport): Map<string, number> {
  const out = new Map<string, number>();
  for (const entry of report.sobol) {
    out.set(`[${entry.subset.join(",")}]`, entry.S);
  }
  return out;
}

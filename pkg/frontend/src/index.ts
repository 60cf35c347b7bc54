/** Node bindings for the stprofiler dataset profiler.
 *
 * The bindings drive the core strictly through its public surfaces: the
 * manifest/table file formats and the command-line subcommands with their
 * JSON artifacts. Results are therefore identical to what the CLI reports
 * for the same seed and configuration. Every exposed value is a copy; no
 * state is shared across the boundary.
 */

import { readdir, readFile, stat } from "node:fs/promises";
import { join } from "node:path";

import {
  ClosedHandleError,
  CoreError,
  NotFoundError,
  ParseError,
  ValueError,
} from "./errors.js";
import { runCli, withArtifacts, type RunnerOptions } from "./runner.js";

export {
  ClosedHandleError,
  CoreError,
  NotFoundError,
  ParseError,
  SchemaError,
  UnsupportedTaskError,
  ValueError,
} from "./errors.js";
export type { RunnerOptions } from "./runner.js";

export const SCORE_KINDS = ["simb", "stood", "io", "outlier"] as const;
export type ScoreKind = (typeof SCORE_KINDS)[number];

export interface SubFeatureSummary {
  name: string;
  kind: string;
  dimension: number | [number, number];
  valueClass: string;
  mapped: boolean;
}

export interface SchemaSummary {
  name: string;
  splits: string[];
  splitShares: Record<string, number>;
  timeCoordinates: string[];
  spaceCoordinates: string[];
  features: SubFeatureSummary[];
  labels: SubFeatureSummary[];
}

/** Score report as serialized by the core (keys verbatim). */
export interface ScoreReport {
  kind: string;
  overall: number;
  sub_scores: Record<string, number>;
  splits: string[];
  config: Record<string, unknown>;
  row_counts: Record<string, number>;
  approximate: boolean;
}

export interface CapacityReport {
  n: number;
  shares: { train: number; val: number; test: number };
  d_x: number | [number, number];
  d_y: number | [number, number];
  ipt: number;
  sft: number;
  ipt_display: string;
  sft_display: string;
}

export interface SplitResult {
  /** Split label per data point, in row order. */
  assignments: string[];
  counts: Record<string, number>;
  spec: Record<string, unknown>;
  sampled: { spatial_ids: unknown[]; temporal: Record<string, unknown[]> };
}

export interface BenchmarkResult {
  metric_name: string;
  metric_value: number;
  wall_time_s: number;
  time_per_1000_s: number;
  n_train_rows: number;
  n_test_rows: number;
  featurizer: string;
  config: Record<string, unknown>;
}

export interface ScoreOptions {
  /** Splits the score runs on: one for simb/outlier, two for stood; io
   *  pools every listed split. Defaults to ["train"] / ["train", "val"]. */
  splits?: string[];
  target?: "features" | "labels";
  bins?: number;
  sampleCap?: number;
  pairCap?: number;
  memoryBudget?: number;
  seed?: number;
}

export interface SplitOptions {
  spatialFraction?: number;
  temporalFraction?: number;
  mode?: "union" | "intersection";
  temporalRule?: "any" | "all";
  valRatio?: number;
  block?: number;
  seed?: number;
  /** Source splits to scan; defaults to all declared in the manifest. */
  splits?: string[];
}

export interface BenchmarkOptions {
  trees?: number;
  maxDepth?: number;
  sampleRatio?: number;
  task?: "regression" | "classification";
  featurizer?: "numeric" | "bag-of-words" | "molecule";
  seed?: number;
}

interface ManifestSubFeature {
  name: string;
  dimension: number | [number, number];
  value_class?: string;
}

interface ManifestComponent {
  kind: string;
  sub_features: ManifestSubFeature[];
}

interface ManifestDocument {
  name?: string;
  splits?: Record<string, string>;
  split_shares?: Record<string, number>;
  coordinates?: { time?: string[]; space?: string[] };
  features?: ManifestComponent[];
  labels?: ManifestComponent[];
  mappings?: { column: string; path: string; regular: boolean }[];
}

function summarize(doc: ManifestDocument): SchemaSummary {
  const mapped = new Set((doc.mappings ?? []).map((m) => m.column));
  const flatten = (components: ManifestComponent[]): SubFeatureSummary[] =>
    components.flatMap((component) =>
      component.sub_features.map((sub) => ({
        name: sub.name,
        kind: component.kind,
        dimension: Array.isArray(sub.dimension)
          ? ([sub.dimension[0], sub.dimension[1]] as [number, number])
          : sub.dimension,
        valueClass: sub.value_class ?? "numeric",
        mapped: mapped.has(sub.name),
      })),
    );
  return {
    name: doc.name ?? "unnamed",
    splits: Object.keys(doc.splits ?? {}),
    splitShares: { ...(doc.split_shares ?? {}) },
    timeCoordinates: [...(doc.coordinates?.time ?? [])],
    spaceCoordinates: [...(doc.coordinates?.space ?? [])],
    features: flatten(doc.features ?? []),
    labels: flatten(doc.labels ?? []),
  };
}

async function readJson(path: string): Promise<unknown> {
  return JSON.parse(await readFile(path, "utf-8"));
}

/** An open dataset handle bound to a manifest on disk. */
export class BoundDataset {
  readonly manifestPath: string;
  readonly schema: SchemaSummary;
  private readonly runner?: RunnerOptions;
  private closed = false;

  private constructor(manifestPath: string, schema: SchemaSummary, runner?: RunnerOptions) {
    this.manifestPath = manifestPath;
    this.schema = schema;
    this.runner = runner;
  }

  /** Open a dataset from its manifest path.
   *
   * Missing files raise NotFoundError; malformed manifests raise ParseError
   * carrying the parser's position information.
   */
  static async load(manifestPath: string, runner?: RunnerOptions): Promise<BoundDataset> {
    try {
      await stat(manifestPath);
    } catch {
      throw new NotFoundError(`manifest not found: ${manifestPath}`);
    }
    const text = await readFile(manifestPath, "utf-8");
    let doc: ManifestDocument;
    try {
      doc = JSON.parse(text) as ManifestDocument;
    } catch (err) {
      // the core's diagnostic carries the exact line/column
      await runCli(["capacity", "--manifest", manifestPath], runner);
      throw new ParseError(`manifest parse error: ${(err as Error).message}`);
    }
    return new BoundDataset(manifestPath, summarize(doc), runner);
  }

  close(): void {
    this.closed = true;
  }

  private guard(): void {
    if (this.closed) {
      throw new ClosedHandleError("dataset handle is closed");
    }
  }

  private common(seed: number | undefined): string[] {
    return ["--manifest", this.manifestPath, "--seed", String(seed ?? 0)];
  }

  /** Compute one score kind; identical to the CLI for the same seed/config. */
  async score(kind: ScoreKind, options: ScoreOptions = {}): Promise<ScoreReport> {
    this.guard();
    if (!SCORE_KINDS.includes(kind)) {
      throw new ValueError(
        `unknown score kind '${kind}'; valid kinds: ${SCORE_KINDS.join(", ")}`,
      );
    }
    const splits = options.splits ?? (kind === "stood" ? ["train", "val"] : ["train"]);
    const args = [
      "score",
      ...this.common(options.seed),
      "--score",
      kind,
      "--splits",
      splits.join(","),
      "--target",
      options.target ?? "features",
    ];
    if (options.bins !== undefined) args.push("--bins", String(options.bins));
    if (options.sampleCap !== undefined) args.push("--sample-cap", String(options.sampleCap));
    if (options.pairCap !== undefined) args.push("--pair-cap", String(options.pairCap));
    if (options.memoryBudget !== undefined) {
      args.push("--memory-budget", String(options.memoryBudget));
    }
    return withArtifacts(
      args,
      async (outDir) => {
        const names = (await readdir(outDir)).filter((n) => n.startsWith("score_"));
        if (names.length !== 1) {
          throw new CoreError("CoreError", `expected one score artifact, found ${names}`);
        }
        return (await readJson(join(outDir, names[0]))) as ScoreReport;
      },
      this.runner,
    );
  }

  /** Interpolation and smooth-function thresholds for this dataset. */
  async capacity(): Promise<CapacityReport> {
    this.guard();
    return withArtifacts(
      ["capacity", "--manifest", this.manifestPath],
      async (outDir) => (await readJson(join(outDir, "capacity.json"))) as CapacityReport,
      this.runner,
    );
  }

  /** Generate an out-of-distribution split assignment. */
  async split(options: SplitOptions = {}): Promise<SplitResult> {
    this.guard();
    const args = [
      "split",
      ...this.common(options.seed),
      "--spatial-frac",
      String(options.spatialFraction ?? 0),
      "--temporal-frac",
      String(options.temporalFraction ?? 0),
      "--mode",
      options.mode ?? "union",
      "--temporal-rule",
      options.temporalRule ?? "any",
      "--val-ratio",
      String(options.valRatio ?? 0.5),
    ];
    if (options.block !== undefined) args.push("--block", String(options.block));
    if (options.splits !== undefined) args.push("--splits", options.splits.join(","));
    return withArtifacts(
      args,
      async (outDir) => {
        const table = await readFile(join(outDir, "assignment.csv"), "utf-8");
        const assignments = table
          .trimEnd()
          .split("\n")
          .slice(1)
          .map((line) => line.split(",")[1]);
        const meta = (await readJson(join(outDir, "assignment_meta.json"))) as {
          counts: Record<string, number>;
          spec: Record<string, unknown>;
          sampled: SplitResult["sampled"];
        };
        return { assignments, counts: meta.counts, spec: meta.spec, sampled: meta.sampled };
      },
      this.runner,
    );
  }

  /** Fit and evaluate the forest baseline on train/test. */
  async benchmark(options: BenchmarkOptions = {}): Promise<BenchmarkResult> {
    this.guard();
    const args = ["benchmark", ...this.common(options.seed)];
    if (options.trees !== undefined) args.push("--trees", String(options.trees));
    if (options.maxDepth !== undefined) args.push("--max-depth", String(options.maxDepth));
    if (options.sampleRatio !== undefined) {
      args.push("--sample-ratio", String(options.sampleRatio));
    }
    if (options.task !== undefined) args.push("--task", options.task);
    if (options.featurizer !== undefined) args.push("--featurizer", options.featurizer);
    return withArtifacts(
      args,
      async (outDir) => (await readJson(join(outDir, "benchmark.json"))) as BenchmarkResult,
      this.runner,
    );
  }
}

/** Open a dataset; alias for BoundDataset.load. */
export function load(manifestPath: string, runner?: RunnerOptions): Promise<BoundDataset> {
  return BoundDataset.load(manifestPath, runner);
}

export interface Dimensions {
  n: number;
  shares: [number, number, number];
  dX: number | [number, number];
  dY: number | [number, number];
  effectiveDx?: number;
  effectiveDy?: number;
}

/** Capacity thresholds from explicit dimensions (no dataset needed). */
export async function capacityFromDims(
  dims: Dimensions,
  runner?: RunnerOptions,
): Promise<CapacityReport> {
  const render = (d: number | [number, number]) =>
    Array.isArray(d) ? `${d[0]}:${d[1]}` : String(d);
  const args = [
    "capacity",
    "--n",
    String(dims.n),
    "--shares",
    dims.shares.join(","),
    "--dx",
    render(dims.dX),
    "--dy",
    render(dims.dY),
  ];
  if (dims.effectiveDx !== undefined) args.push("--effective-dx", String(dims.effectiveDx));
  if (dims.effectiveDy !== undefined) args.push("--effective-dy", String(dims.effectiveDy));
  return withArtifacts(
    args,
    async (outDir) => (await readJson(join(outDir, "capacity.json"))) as CapacityReport,
    runner,
  );
}

/** Version string of the core engine (must match this package's own). */
export async function coreVersion(runner?: RunnerOptions): Promise<string> {
  const { stdout } = await runCli(["--version"], runner);
  return stdout.trim().split(/\s+/).pop() ?? "";
}

import { execFile } from "node:child_process";
import { mkdtemp, readdir, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { promisify } from "node:util";

import { afterAll, describe, expect, it } from "vitest";

import {
  BoundDataset,
  capacityFromDims,
  coreVersion,
  load,
  NotFoundError,
  ParseError,
  UnsupportedTaskError,
  ValueError,
  type ScoreReport,
} from "../src/index.js";

const here = dirname(fileURLToPath(import.meta.url));
const manifestPath = join(here, "fixtures", "dataset", "manifest.json");
const execFileAsync = promisify(execFile);

const scratch: string[] = [];
async function scratchDir(): Promise<string> {
  const dir = await mkdtemp(join(tmpdir(), "bindings-test-"));
  scratch.push(dir);
  return dir;
}
afterAll(async () => {
  await Promise.all(scratch.map((dir) => rm(dir, { recursive: true, force: true })));
});

/** Run the core CLI directly, bypassing the bindings, and collect artifacts. */
async function directCli(args: string[]): Promise<string> {
  const outDir = await scratchDir();
  await execFileAsync("python3", ["-m", "stprofiler", ...args, "--out", outDir]);
  return outDir;
}

describe("load", () => {
  it("opens a valid manifest and summarizes the schema", async () => {
    const ds = await load(manifestPath);
    expect(ds.schema.name).toBe("bindings-fixture");
    expect(ds.schema.splits.sort()).toEqual(["test", "train", "val"]);
    expect(ds.schema.splitShares.train).toBeCloseTo(0.6, 12);
    expect(ds.schema.timeCoordinates).toEqual(["day"]);
    expect(ds.schema.spaceCoordinates).toEqual(["site"]);
    expect(ds.schema.features.map((f) => f.name)).toEqual(["day", "site", "wind", "temp"]);
    expect(ds.schema.labels.map((l) => l.name)).toEqual(["power"]);
  });

  it("raises NotFoundError for a missing manifest", async () => {
    await expect(load(join(here, "nope.json"))).rejects.toBeInstanceOf(NotFoundError);
  });

  it("raises ParseError with position info for a malformed manifest", async () => {
    const dir = await scratchDir();
    const bad = join(dir, "broken.json");
    await writeFile(bad, '{"name": "x", "splits": }');
    const err = await load(bad).catch((e) => e);
    expect(err).toBeInstanceOf(ParseError);
    expect(String(err.message)).toMatch(/position|line/i);
  });

  it("refuses calls after close", async () => {
    const ds = await load(manifestPath);
    ds.close();
    await expect(ds.capacity()).rejects.toThrow(/closed/);
  });
});

describe("score", () => {
  it("rejects unknown kinds, listing the valid ones", async () => {
    const ds = await load(manifestPath);
    const err = await ds
      .score("entropy" as never)
      .catch((e) => e);
    expect(err).toBeInstanceOf(ValueError);
    expect(String(err.message)).toContain("simb, stood, io, outlier");
  });

  it("sample imbalance equals the core CLI result exactly", async () => {
    const ds = await load(manifestPath);
    const viaBindings = await ds.score("simb", { splits: ["train"], bins: 500, seed: 7 });
    const outDir = await directCli([
      "score", "--manifest", manifestPath, "--score", "simb",
      "--splits", "train", "--target", "features", "--bins", "500", "--seed", "7",
    ]);
    const artifact = (await readdir(outDir)).find((n) => n.startsWith("score_"))!;
    const viaCli = JSON.parse(await readFile(join(outDir, artifact), "utf-8")) as ScoreReport;
    expect(viaBindings.overall).toBe(viaCli.overall);
    expect(viaBindings.sub_scores).toEqual(viaCli.sub_scores);
    expect(viaBindings.row_counts).toEqual(viaCli.row_counts);
    expect(viaBindings.approximate).toBe(false);
    expect(viaBindings.overall).toBeGreaterThanOrEqual(0);
    expect(viaBindings.overall).toBeLessThanOrEqual(1);
  });

  it("split shift on identical splits is exactly zero", async () => {
    const ds = await load(manifestPath);
    const report = await ds.score("stood", { splits: ["val", "val"], bins: 1000 });
    expect(report.overall).toBe(0);
  });

  it("every kind matches the core CLI for a fixed seed/config", async () => {
    const ds = await load(manifestPath);
    const cases: [string, string[]][] = [
      ["simb", ["train"]],
      ["stood", ["train", "test"]],
      ["io", ["train"]],
      ["outlier", ["test"]],
    ];
    for (const [kind, splits] of cases) {
      const viaBindings = await ds.score(kind as never, { splits, bins: 256, seed: 3 });
      const outDir = await directCli([
        "score", "--manifest", manifestPath, "--score", kind,
        "--splits", splits.join(","), "--target", "features",
        "--bins", "256", "--seed", "3",
      ]);
      const artifact = (await readdir(outDir)).find((n) => n.startsWith("score_"))!;
      const viaCli = JSON.parse(await readFile(join(outDir, artifact), "utf-8"));
      expect(viaBindings).toEqual(viaCli);
    }
  });

  it("labels can be scored separately", async () => {
    const ds = await load(manifestPath);
    const report = await ds.score("simb", { splits: ["train"], target: "labels", bins: 200 });
    expect(Object.keys(report.sub_scores)).toEqual(["power"]);
  });
});

describe("capacity", () => {
  it("matches the core CLI from the manifest", async () => {
    const ds = await load(manifestPath);
    const viaBindings = await ds.capacity();
    const outDir = await directCli(["capacity", "--manifest", manifestPath]);
    const viaCli = JSON.parse(await readFile(join(outDir, "capacity.json"), "utf-8"));
    expect(viaBindings).toEqual(viaCli);
    expect(viaBindings.n).toBe(600);
    expect(viaBindings.sft).toBe(viaBindings.ipt * 4);
  });

  it("renders reference dimensions exactly", async () => {
    const report = await capacityFromDims({
      n: 3_206_016,
      shares: [0.56, 0.09, 0.35],
      dX: 521,
      dY: 96,
    });
    expect(report.ipt).toBe(172_355_420);
    expect(report.ipt_display).toBe("172M");
    expect(report.sft_display).toBe("90B");
  });
});

describe("split", () => {
  it("is deterministic and equals the core CLI assignment exactly", async () => {
    const ds = await load(manifestPath);
    const opts = { spatialFraction: 0.25, temporalFraction: 0.1, seed: 42 } as const;
    const viaBindings = await ds.split(opts);
    const outDir = await directCli([
      "split", "--manifest", manifestPath, "--spatial-frac", "0.25",
      "--temporal-frac", "0.1", "--seed", "42", "--mode", "union",
      "--temporal-rule", "any", "--val-ratio", "0.5",
    ]);
    const table = await readFile(join(outDir, "assignment.csv"), "utf-8");
    const viaCli = table.trimEnd().split("\n").slice(1).map((line) => line.split(",")[1]);
    expect(viaBindings.assignments).toEqual(viaCli);
    const total = Object.values(viaBindings.counts).reduce((a, b) => a + b, 0);
    expect(total).toBe(600);
    expect(viaBindings.assignments.length).toBe(600);
    expect(viaBindings.spec.seed).toBe(42);
    // repeated runs reproduce the same assignment
    const again = await ds.split(opts);
    expect(again.assignments).toEqual(viaBindings.assignments);
  });

  it("zero fractions put every point in train", async () => {
    const ds = await load(manifestPath);
    const result = await ds.split({ seed: 1 });
    expect(new Set(result.assignments)).toEqual(new Set(["train"]));
  });
});

describe("benchmark", () => {
  it("matches the core CLI metric for the same seed", async () => {
    const ds = await load(manifestPath);
    const viaBindings = await ds.benchmark({ trees: 8, maxDepth: 6, seed: 5 });
    const outDir = await directCli([
      "benchmark", "--manifest", manifestPath, "--trees", "8",
      "--max-depth", "6", "--seed", "5",
    ]);
    const viaCli = JSON.parse(await readFile(join(outDir, "benchmark.json"), "utf-8"));
    expect(viaBindings.metric_name).toBe("r2");
    expect(viaBindings.metric_value).toBe(viaCli.metric_value);
    expect(viaBindings.n_train_rows).toBe(viaCli.n_train_rows);
    expect(viaBindings.config).toEqual(viaCli.config);
    expect(Number.isFinite(viaBindings.wall_time_s)).toBe(true);
  });

  it("maps the unsupported-task diagnostic to a typed error", async () => {
    // variable-length labels: fixed features, ragged label blocks
    const dir = await scratchDir();
    const makeFixture = `
import numpy as np
from stprofiler import write_dataset, CoordinateSpec, DatasetSchema, FeatureComponent, MappingRef, SubFeature
from stprofiler.schema import SPACE_TIME, TIME
schema = DatasetSchema(
    name="varlabels",
    feature_components=(FeatureComponent(TIME, (SubFeature("step", 1),)),),
    label_components=(FeatureComponent(SPACE_TIME, (SubFeature("pos", (2, 8)),)),),
    coordinates=CoordinateSpec(time=("step",)),
    mapping_refs=(MappingRef("pos", "side/pos.json", False),),
    split_shares={"train": 0.6, "val": 0.2, "test": 0.2},
)
rng = np.random.default_rng(0)
def split(n):
    return {"step": rng.integers(0, 5, n).astype(float),
            "pos": [f"s{int(i)}" for i in rng.integers(0, 3, n)]}
side = {"pos": {f"s{i}": rng.random(int(rng.integers(2, 9))).tolist() for i in range(3)}}
write_dataset(schema, {"train": split(20), "val": split(8), "test": split(8)}, r"${dir}", side)
`;
    await execFileAsync("python3", ["-c", makeFixture.replace("${dir}", dir)]);
    const ds = await load(join(dir, "manifest.json"));
    await expect(ds.benchmark({ trees: 2 })).rejects.toBeInstanceOf(UnsupportedTaskError);
  });
});

describe("versioning", () => {
  it("core and bindings versions match", async () => {
    const pkg = JSON.parse(
      await readFile(join(here, "..", "package.json"), "utf-8"),
    ) as { version: string };
    expect(await coreVersion()).toBe(pkg.version);
  });
});

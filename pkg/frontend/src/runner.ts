/** Spawns the core command-line tool and maps its diagnostics. */

import { execFile } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { mapDiagnostic } from "./errors.js";

export interface RunnerOptions {
  /** Interpreter used to launch the core (default: python3, override with
   *  the STPROFILER_PYTHON environment variable). */
  python?: string;
  /** Abort a long-running computation; the core is interruptible. */
  signal?: AbortSignal;
}

export interface CliResult {
  stdout: string;
  stderr: string;
}

export function pythonCommand(options?: RunnerOptions): string {
  return options?.python ?? process.env.STPROFILER_PYTHON ?? "python3";
}

export function runCli(args: string[], options?: RunnerOptions): Promise<CliResult> {
  return new Promise((resolve, reject) => {
    execFile(
      pythonCommand(options),
      ["-m", "stprofiler", ...args],
      { signal: options?.signal, maxBuffer: 64 * 1024 * 1024 },
      (error, stdout, stderr) => {
        if (error) {
          const code = (error as NodeJS.ErrnoException & { code?: number | string }).code;
          reject(mapDiagnostic(stderr, typeof code === "number" ? code : null));
          return;
        }
        resolve({ stdout, stderr });
      },
    );
  });
}

/** Run a CLI subcommand that writes artifacts into a fresh scratch directory,
 *  hand the directory to `collect`, then clean up. */
export async function withArtifacts<T>(
  args: string[],
  collect: (outDir: string) => Promise<T>,
  options?: RunnerOptions,
): Promise<T> {
  const outDir = await mkdtemp(join(tmpdir(), "stprofiler-"));
  try {
    await runCli([...args, "--out", outDir], options);
    return await collect(outDir);
  } finally {
    await rm(outDir, { recursive: true, force: true });
  }
}

/**
 * End-to-end: adapter with the mock backend over the bundled fixture
 * manifest, scored by the leakprobe CLI. Skipped when the scorer is not
 * installed in the environment.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { DEFAULT_CONFIG, MockBackend, MockMode } from "../src/backends.js";
import { generateAll, parseSeed, SeedRecord } from "../src/genContexts.js";
import { readJsonl, writeJsonl } from "../src/jsonl.js";
import { transcribeAll } from "../src/transcribe.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const REPO_ROOT = resolve(HERE, "..", "..");
const MANIFEST = join(REPO_ROOT, "tests", "data", "manifest12.jsonl");

function scorerAvailable(): boolean {
  try {
    execFileSync("python3", ["-c", "import leakprobe"], { stdio: "ignore" });
    return true;
  } catch {
    return false;
  }
}

const HAVE_SCORER = scorerAvailable();

function leakprobe(...args: string[]): string {
  return execFileSync("python3", ["-m", "leakprobe.cli", ...args], {
    encoding: "utf-8",
  });
}

function mock(mode: MockMode) {
  return new MockBackend({ ...DEFAULT_CONFIG, kind: "mock", mockMode: mode });
}

function aggregateRow(outDir: string): Record<string, string> {
  const lines = readFileSync(join(outDir, "aggregate.csv"), "utf-8")
    .split("\n")
    .filter((l) => l && !l.startsWith("#"));
  const columns = lines[0]!.split(",");
  const values = lines[1]!.split(",");
  return Object.fromEntries(columns.map((c, i) => [c, values[i]!]));
}

describe.skipIf(!HAVE_SCORER)("mock end-to-end through the scorer", () => {
  it("echo mock gives accuracy 1, leakage 0, background WER 0", async () => {
    const dir = mkdtempSync(join(tmpdir(), "adapter-e2e-"));
    const contexts = join(dir, "ctx.jsonl");
    leakprobe("contexts", MANIFEST, "--mode", "sent1", "--seed", "0",
              "-o", contexts);
    const hyps = join(dir, "hyps-echo.jsonl");
    const summary = await transcribeAll(mock("echo"), {
      manifestPath: MANIFEST,
      contextsPath: contexts,
      template: "phi4",
      modelTag: "mock-echo",
      outputPath: hyps,
      concurrency: 2,
    });
    expect(summary.written).toBe(12);
    const outDir = join(dir, "scores-echo");
    leakprobe("score", "--manifest", MANIFEST, "--hypotheses", hyps, "-o", outDir);
    const row = aggregateRow(outDir);
    expect(row.acoustic_accuracy).toBe("1.0000");
    expect(row.leakage_rate).toBe("0.0000");
    expect(row.mean_background_wer).toBe("0.0000");
  });

  it("substitution mock gives leakage 1, accuracy 0, background WER 0", async () => {
    const dir = mkdtempSync(join(tmpdir(), "adapter-e2e-"));
    const contexts = join(dir, "ctx.jsonl");
    leakprobe("contexts", MANIFEST, "--mode", "word", "--seed", "0",
              "-o", contexts);
    const hyps = join(dir, "hyps-swap.jsonl");
    await transcribeAll(mock("swap"), {
      manifestPath: MANIFEST,
      contextsPath: contexts,
      template: "qwen",
      modelTag: "mock-swap",
      outputPath: hyps,
      concurrency: 1,
    });
    const outDir = join(dir, "scores-swap");
    leakprobe("score", "--manifest", MANIFEST, "--hypotheses", hyps, "-o", outDir);
    const row = aggregateRow(outDir);
    expect(row.leakage_rate).toBe("1.0000");
    expect(row.acoustic_accuracy).toBe("0.0000");
    expect(row.mean_background_wer).toBe("0.0000");
  });

  it("gen-contexts output validates as a scorer manifest", async () => {
    const dir = mkdtempSync(join(tmpdir(), "adapter-e2e-"));
    const seeds: SeedRecord[] = readJsonl(MANIFEST)
      .filter((r) => r.record === "item")
      .map((r) =>
        parseSeed({
          item_id: r.item_id,
          dataset: r.dataset,
          acoustic_word: r.acoustic_word,
          context_word: r.context_word,
          phoneme_distance: r.phoneme_distance,
          transcript: r.reference_transcript,
        }),
      );
    const { items, flagged } = await generateAll(mock("wellformed"), seeds);
    expect(flagged).toHaveLength(0);
    expect(items).toHaveLength(12);
    const manifest = join(dir, "generated-manifest.jsonl");
    writeJsonl(manifest, [
      { record: "header", schema: "leakprobe-manifest", version: 1 },
      ...items,
    ]);
    const report = leakprobe("validate", manifest, "--strict");
    expect(report).toContain("12 item(s), 0 violation(s)");
  });
});

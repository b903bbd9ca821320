#!/usr/bin/env node
/**
 * adapter gen-contexts --input seeds.jsonl --output manifest.jsonl
 *                      --backend mock|http-endpoint|local-runtime [options]
 * adapter transcribe   --manifest manifest.jsonl [--contexts ctx.jsonl]
 *                      --template phi4|qwen --output hyps.jsonl
 *                      --backend mock|http-endpoint|local-runtime [options]
 *
 * Endpoint URL and key come from --endpoint / $ADAPTER_ENDPOINT and
 * $ADAPTER_API_KEY.
 */

import { BackendConfig, BackendKind, DEFAULT_CONFIG, makeBackend, MockMode } from "./backends.js";
import { generateAll, parseSeed } from "./genContexts.js";
import { readJsonl, writeJsonl, JsonRecord } from "./jsonl.js";
import { ModelTemplate } from "./templates.js";
import { transcribeAll } from "./transcribe.js";

interface Parsed {
  command: string;
  flags: Map<string, string>;
  switches: Set<string>;
}

function parseArgv(argv: string[]): Parsed {
  const [command, ...rest] = argv;
  if (!command) usage("missing command");
  const flags = new Map<string, string>();
  const switches = new Set<string>();
  for (let i = 0; i < rest.length; i++) {
    const arg = rest[i]!;
    if (!arg.startsWith("--")) usage(`unexpected argument ${arg}`);
    const name = arg.slice(2);
    const next = rest[i + 1];
    if (next !== undefined && !next.startsWith("--")) {
      flags.set(name, next);
      i++;
    } else {
      switches.add(name);
    }
  }
  return { command: command!, flags, switches };
}

function usage(message: string): never {
  console.error(`error: ${message}`);
  console.error(
    "usage: adapter gen-contexts --input seeds.jsonl --output out.jsonl --backend mock [...]\n" +
      "       adapter transcribe --manifest m.jsonl [--contexts c.jsonl] " +
      "--template phi4|qwen --output hyps.jsonl --backend mock [...]",
  );
  process.exit(2);
}

function required(parsed: Parsed, name: string): string {
  const value = parsed.flags.get(name);
  if (value === undefined) usage(`--${name} is required`);
  return value;
}

function backendFromFlags(parsed: Parsed): BackendConfig {
  const kind = required(parsed, "backend") as BackendKind;
  if (!["mock", "http-endpoint", "local-runtime"].includes(kind)) {
    usage(`unknown backend kind ${kind}`);
  }
  const config: BackendConfig = {
    ...DEFAULT_CONFIG,
    kind,
    model: parsed.flags.get("model") ?? DEFAULT_CONFIG.model,
  };
  if (parsed.flags.has("retries")) {
    config.maxRetries = Number(parsed.flags.get("retries"));
    if (!Number.isInteger(config.maxRetries) || config.maxRetries < 0) {
      usage("--retries must be a non-negative integer");
    }
  }
  if (parsed.flags.has("timeout-ms")) {
    config.timeoutMs = Number(parsed.flags.get("timeout-ms"));
  }
  if (parsed.flags.has("temperature")) {
    config.temperature = Number(parsed.flags.get("temperature"));
  }
  if (parsed.flags.has("max-tokens")) {
    config.maxTokens = Number(parsed.flags.get("max-tokens"));
  }
  config.endpoint = parsed.flags.get("endpoint") ?? process.env.ADAPTER_ENDPOINT;
  config.apiKey = process.env.ADAPTER_API_KEY;
  if (parsed.flags.has("command")) {
    config.command = parsed.flags.get("command")!.split(" ");
  }
  if (parsed.flags.has("mock-mode")) {
    config.mockMode = parsed.flags.get("mock-mode") as MockMode;
  }
  return config;
}

async function cmdGenContexts(parsed: Parsed): Promise<number> {
  const inputPath = required(parsed, "input");
  const outputPath = required(parsed, "output");
  const backend = makeBackend(backendFromFlags(parsed));
  const seeds = readJsonl(inputPath)
    .filter((r) => r.schema === undefined)
    .map(parseSeed);
  const { items, flagged } = await generateAll(backend, seeds);
  const records: JsonRecord[] = [
    { record: "header", schema: "leakprobe-manifest", version: 1 },
    ...items,
    ...flagged.map((f) => ({ record: "flagged", ...f })),
  ];
  writeJsonl(outputPath, records);
  console.log(
    `generated ${items.length} item(s), flagged ${flagged.length} -> ${outputPath}`,
  );
  return flagged.length > 0 ? 1 : 0;
}

async function cmdTranscribe(parsed: Parsed): Promise<number> {
  const template = required(parsed, "template") as ModelTemplate;
  if (!["phi4", "qwen"].includes(template)) usage(`unknown template ${template}`);
  const backend = makeBackend(backendFromFlags(parsed));
  const summary = await transcribeAll(backend, {
    manifestPath: required(parsed, "manifest"),
    contextsPath: parsed.flags.get("contexts"),
    template,
    modelTag: parsed.flags.get("model") ?? backend.config.model,
    outputPath: required(parsed, "output"),
    concurrency: Number(parsed.flags.get("concurrency") ?? "1"),
  });
  console.log(
    `condition ${summary.conditionId}: wrote ${summary.written}, ` +
      `skipped ${summary.skipped} (resume), errors ${summary.errors}`,
  );
  return summary.errors > 0 ? 1 : 0;
}

export async function main(argv: string[]): Promise<number> {
  const parsed = parseArgv(argv);
  switch (parsed.command) {
    case "gen-contexts":
      return cmdGenContexts(parsed);
    case "transcribe":
      return cmdTranscribe(parsed);
    default:
      usage(`unknown command ${parsed.command}`);
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (err) => {
      console.error(`error: ${err}`);
      process.exit(1);
    },
  );
}

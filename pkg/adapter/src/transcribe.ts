/**
 * Transcribe every manifest item under one prompt condition, emitting
 * hypothesis JSONL for the scorer. Records append as they complete and
 * existing (item_id, condition_id, model) keys are skipped, so a killed run
 * resumes without duplicates.
 */

import { existsSync } from "node:fs";

import { Backend, withRetries } from "./backends.js";
import { appendJsonl, JsonRecord, readJsonl, readJsonlIfExists } from "./jsonl.js";
import { buildTranscriptionPrompt, ModelTemplate } from "./templates.js";

export interface ManifestItem {
  item_id: string;
  reference_transcript: string;
  acoustic_word: string;
  context_word: string;
  audio_path?: string;
}

export interface TranscribeOptions {
  manifestPath: string;
  contextsPath?: string; // omitted for the no-context condition
  template: ModelTemplate;
  modelTag: string;
  outputPath: string;
  concurrency: number;
}

export interface TranscribeSummary {
  written: number;
  skipped: number;
  errors: number;
  conditionId: string;
}

export function loadManifestItems(path: string): ManifestItem[] {
  const items: ManifestItem[] = [];
  for (const record of readJsonl(path)) {
    if (record.record !== undefined && record.record !== "item") continue;
    if (record.schema !== undefined) continue;
    if (typeof record.item_id !== "string") continue;
    items.push(record as unknown as ManifestItem);
  }
  return items;
}

export interface ContextsFile {
  conditionId: string;
  byItem: Map<string, string>;
}

export function loadContexts(path: string): ContextsFile {
  let conditionId: string | undefined;
  const byItem = new Map<string, string>();
  for (const record of readJsonl(path)) {
    if (typeof record.condition_id === "string" && record.record === "header") {
      conditionId = record.condition_id;
      continue;
    }
    if (record.record === "context" || record.context !== undefined) {
      byItem.set(String(record.item_id), String(record.context ?? ""));
      if (conditionId === undefined && typeof record.condition_id === "string") {
        conditionId = record.condition_id;
      }
    }
  }
  if (conditionId === undefined) {
    throw new Error(`${path}: no condition_id in header or records`);
  }
  return { conditionId, byItem };
}

export function existingKeys(path: string): Set<string> {
  const keys = new Set<string>();
  for (const record of readJsonlIfExists(path)) {
    if (record.record === "hypothesis" || record.text !== undefined) {
      keys.add(
        recordKey(
          String(record.item_id),
          String(record.condition_id),
          String(record.model),
        ),
      );
    }
  }
  return keys;
}

export function recordKey(itemId: string, conditionId: string, model: string): string {
  return JSON.stringify([itemId, conditionId, model]);
}

export async function transcribeAll(
  backend: Backend,
  options: TranscribeOptions,
): Promise<TranscribeSummary> {
  const items = loadManifestItems(options.manifestPath);
  const contexts = options.contextsPath
    ? loadContexts(options.contextsPath)
    : { conditionId: "none", byItem: new Map<string, string>() };
  const seen = existingKeys(options.outputPath);
  if (!existsSync(options.outputPath)) {
    appendJsonl(options.outputPath, {
      record: "header",
      schema: "leakprobe-hypotheses",
      version: 1,
      model: options.modelTag,
      template: options.template,
      decoding: { temperature: backend.config.temperature },
    });
  }
  const summary: TranscribeSummary = {
    written: 0,
    skipped: 0,
    errors: 0,
    conditionId: contexts.conditionId,
  };
  const queue = [...items];
  const workers = Math.max(1, options.concurrency);
  const run = async () => {
    for (;;) {
      const item = queue.shift();
      if (!item) return;
      const record = await transcribeOne(backend, options, contexts, seen, item);
      if (!record) {
        summary.skipped += 1;
        continue;
      }
      // synchronous append: records land one at a time, kill-safe
      appendJsonl(options.outputPath, record);
      if (record.record === "hypothesis") summary.written += 1;
      else summary.errors += 1;
    }
  };
  await Promise.all(Array.from({ length: workers }, run));
  return summary;
}

async function transcribeOne(
  backend: Backend,
  options: TranscribeOptions,
  contexts: ContextsFile,
  seen: Set<string>,
  item: ManifestItem,
): Promise<JsonRecord | null> {
  const key = recordKey(item.item_id, contexts.conditionId, options.modelTag);
  if (seen.has(key)) return null;
  const base = {
    item_id: item.item_id,
    condition_id: contexts.conditionId,
    model: options.modelTag,
  };
  if (options.contextsPath && !contexts.byItem.has(item.item_id)) {
    return { record: "error", ...base, error: "missing-context" };
  }
  const context = contexts.byItem.get(item.item_id) ?? "";
  const prompt = buildTranscriptionPrompt(options.template, context);
  if (backend.config.kind !== "mock") {
    if (!item.audio_path || !existsSync(item.audio_path)) {
      return { record: "error", ...base, error: "audio-missing" };
    }
  }
  try {
    const text = await withRetries(
      () =>
        backend.complete({
          purpose: "transcribe",
          system: prompt.system,
          user: prompt.user,
          audioPath: item.audio_path,
          meta: {
            itemId: item.item_id,
            acousticWord: item.acoustic_word,
            contextWord: item.context_word,
            referenceTranscript: item.reference_transcript,
          },
        }),
      backend.config.maxRetries,
      `${item.item_id}: transcription`,
    );
    return { record: "hypothesis", ...base, text };
  } catch (err) {
    return { record: "error", ...base, error: String(err) };
  }
}

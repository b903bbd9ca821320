/**
 * Generate the per-pair sentence set: one context sentence (containing the
 * context word), one acoustic sentence (containing the acoustic word) and
 * nine fillers (containing neither). Every sentence is string-checked;
 * failed checks regenerate up to the retry budget, then flag the item.
 */

import { Backend, withRetries } from "./backends.js";
import { JsonRecord } from "./jsonl.js";
import { buildFillerPrompt, buildSentencePrompt } from "./templates.js";
import { containsWord } from "./text.js";

export const N_FILLERS = 9;

export interface SeedRecord {
  item_id: string;
  dataset: string;
  acoustic_word: string;
  context_word: string;
  phoneme_distance: number;
  transcript: string;
  audio_path?: string;
  audio_duration_s?: number;
}

export interface FlaggedItem {
  item_id: string;
  reason: string;
}

export interface GenContextsResult {
  items: JsonRecord[];
  flagged: FlaggedItem[];
}

export function parseSeed(record: JsonRecord): SeedRecord {
  for (const field of [
    "item_id",
    "dataset",
    "acoustic_word",
    "context_word",
    "phoneme_distance",
    "transcript",
  ]) {
    if (!(field in record)) {
      throw new Error(`seed record missing field ${field}`);
    }
  }
  return record as unknown as SeedRecord;
}

async function generateSentence(
  backend: Backend,
  seed: SeedRecord,
  word: string,
): Promise<string> {
  return withRetries(
    async () => {
      const sentence = (
        await backend.complete({
          purpose: "sentence",
          user: buildSentencePrompt(seed.transcript, word),
          meta: { itemId: seed.item_id, word },
        })
      ).trim();
      if (!containsWord(sentence, word)) {
        throw new Error(`sentence does not contain "${word}"`);
      }
      return sentence;
    },
    backend.config.maxRetries,
    `${seed.item_id}: sentence for "${word}"`,
  );
}

async function generateFillers(
  backend: Backend,
  seed: SeedRecord,
): Promise<string[]> {
  return withRetries(
    async () => {
      const raw = await backend.complete({
        purpose: "fillers",
        user: buildFillerPrompt(
          seed.transcript,
          N_FILLERS,
          seed.acoustic_word,
          seed.context_word,
        ),
        meta: {
          itemId: seed.item_id,
          nSentences: N_FILLERS,
          acousticWord: seed.acoustic_word,
          contextWord: seed.context_word,
        },
      });
      const lines = raw
        .split("\n")
        .map((l) => l.trim())
        .filter((l) => l.length > 0);
      if (lines.length !== N_FILLERS) {
        throw new Error(`expected ${N_FILLERS} fillers, got ${lines.length}`);
      }
      for (const line of lines) {
        if (containsWord(line, seed.acoustic_word)) {
          throw new Error("filler contains the acoustic word");
        }
        if (containsWord(line, seed.context_word)) {
          throw new Error("filler contains the context word");
        }
      }
      return lines;
    },
    backend.config.maxRetries,
    `${seed.item_id}: fillers`,
  );
}

export async function generateItem(
  backend: Backend,
  seed: SeedRecord,
): Promise<JsonRecord> {
  const contextSentence = await generateSentence(backend, seed, seed.context_word);
  const acousticSentence = await generateSentence(backend, seed, seed.acoustic_word);
  const fillers = await generateFillers(backend, seed);
  const item: JsonRecord = {
    record: "item",
    item_id: seed.item_id,
    dataset: seed.dataset,
    reference_transcript: seed.transcript,
    acoustic_word: seed.acoustic_word,
    context_word: seed.context_word,
    phoneme_distance: seed.phoneme_distance,
    context_sentence: contextSentence,
    acoustic_sentence: acousticSentence,
    filler_sentences: fillers,
  };
  if (seed.audio_path !== undefined) item.audio_path = seed.audio_path;
  if (seed.audio_duration_s !== undefined) {
    item.audio_duration_s = seed.audio_duration_s;
  }
  return item;
}

export async function generateAll(
  backend: Backend,
  seeds: SeedRecord[],
): Promise<GenContextsResult> {
  const items: JsonRecord[] = [];
  const flagged: FlaggedItem[] = [];
  for (const seed of seeds) {
    try {
      items.push(await generateItem(backend, seed));
    } catch (err) {
      flagged.push({ item_id: seed.item_id, reason: String(err) });
    }
  }
  return { items, flagged };
}

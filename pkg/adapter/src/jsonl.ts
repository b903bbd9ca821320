import { appendFileSync, existsSync, readFileSync, writeFileSync } from "node:fs";

export type JsonRecord = Record<string, unknown>;

export function readJsonl(path: string): JsonRecord[] {
  const records: JsonRecord[] = [];
  const text = readFileSync(path, "utf-8");
  for (const [index, line] of text.split("\n").entries()) {
    if (!line.trim()) continue;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${index + 1}: malformed JSON: ${err}`);
    }
    if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
      throw new Error(`${path}:${index + 1}: not a JSON object`);
    }
    records.push(parsed as JsonRecord);
  }
  return records;
}

export function writeJsonl(path: string, records: JsonRecord[]): void {
  const lines = records.map((r) => JSON.stringify(r));
  writeFileSync(path, lines.join("\n") + (lines.length ? "\n" : ""), "utf-8");
}

export function appendJsonl(path: string, record: JsonRecord): void {
  appendFileSync(path, JSON.stringify(record) + "\n", "utf-8");
}

export function readJsonlIfExists(path: string): JsonRecord[] {
  return existsSync(path) ? readJsonl(path) : [];
}

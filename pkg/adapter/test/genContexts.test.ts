import { describe, expect, it } from "vitest";

import { Backend, DEFAULT_CONFIG, MockBackend } from "../src/backends.js";
import { generateAll, generateItem, SeedRecord } from "../src/genContexts.js";
import { containsWord, normalizeTokens } from "../src/text.js";

const seed: SeedRecord = {
  item_id: "s1",
  dataset: "FLEURS",
  acoustic_word: "texas",
  context_word: "nexus",
  phoneme_distance: 1,
  transcript: "We visited Texas yesterday.",
  audio_path: "audio/s1.wav",
  audio_duration_s: 10.5,
};

function mock(mode?: "wellformed" | "violate-filler" | "empty"): Backend {
  return new MockBackend({
    ...DEFAULT_CONFIG,
    kind: "mock",
    maxRetries: 1,
    mockMode: mode ?? "wellformed",
  });
}

describe("text checks", () => {
  it("normalizes like the scorer", () => {
    expect(normalizeTokens("We visited Texas, yesterday.")).toEqual([
      "we",
      "visited",
      "texas",
      "yesterday",
    ]);
    expect(normalizeTokens("it's state-of-the-art")).toEqual([
      "it's",
      "state-of-the-art",
    ]);
  });

  it("containment is token-level, not substring", () => {
    expect(containsWord("The nexus appears.", "nexus")).toBe(true);
    expect(containsWord("The nexuses appear.", "nexus")).toBe(false);
    expect(containsWord("in new york today", "new york")).toBe(true);
  });
});

describe("generateItem", () => {
  it("produces a manifest item satisfying every string check", async () => {
    const item = await generateItem(mock(), seed);
    expect(item.record).toBe("item");
    expect(item.item_id).toBe("s1");
    expect(containsWord(String(item.context_sentence), "nexus")).toBe(true);
    expect(containsWord(String(item.acoustic_sentence), "texas")).toBe(true);
    const fillers = item.filler_sentences as string[];
    expect(fillers).toHaveLength(9);
    for (const filler of fillers) {
      expect(containsWord(filler, "texas")).toBe(false);
      expect(containsWord(filler, "nexus")).toBe(false);
    }
    expect(item.audio_path).toBe("audio/s1.wav");
    expect(item.audio_duration_s).toBe(10.5);
  });

  it("flags items whose checks keep failing", async () => {
    const { items, flagged } = await generateAll(mock("violate-filler"), [seed]);
    expect(items).toHaveLength(0);
    expect(flagged).toHaveLength(1);
    expect(flagged[0]!.reason).toMatch(/context word/);
  });

  it("flags empty generations", async () => {
    const { items, flagged } = await generateAll(mock("empty"), [seed]);
    expect(items).toHaveLength(0);
    expect(flagged[0]!.reason).toMatch(/does not contain/);
  });

  it("retries transient check failures", async () => {
    let calls = 0;
    const flaky: Backend = {
      config: { ...DEFAULT_CONFIG, kind: "mock", maxRetries: 2 },
      async complete(req) {
        if (req.purpose === "sentence") {
          calls++;
          return calls < 2 ? "no keyword here" : `mentions ${req.meta.word} now`;
        }
        return new MockBackend(this.config).complete(req);
      },
    };
    const item = await generateItem(flaky, seed);
    expect(containsWord(String(item.context_sentence), "nexus")).toBe(true);
    expect(calls).toBeGreaterThanOrEqual(2);
  });
});

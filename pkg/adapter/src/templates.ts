/**
 * Prompt templates. The inference templates are byte-exact contracts with
 * the transcription backends and are covered by golden-string tests; the
 * `{context}` placeholder is replaced by the pre-assembled context string,
 * never re-randomized here.
 */

export const PHI4_NO_CONTEXT =
  "<|user|><|audio_1|>Please transcribe the audio.<|end|><|assistant|>";

export const PHI4_WITH_CONTEXT =
  "<|user|><|audio_1|>Context: {context}\n\nPlease transcribe the audio.<|end|><|assistant|>";

export const QWEN_SYSTEM =
  "You are Qwen, a virtual human developed by the Qwen Team, Alibaba Group, " +
  "capable of perceiving auditory and visual inputs, as well as generating " +
  "text and speech. Only return the answer requested. Do not include any " +
  "explanation or introductions.";

export const QWEN_USER_NO_CONTEXT = "<audio> Please transcribe the audio.";

export const QWEN_USER_WITH_CONTEXT =
  "<audio> Context: {context}\n\nPlease transcribe the audio.";

export type ModelTemplate = "phi4" | "qwen";

export interface TranscriptionPrompt {
  /** System message, when the template defines one. */
  system?: string;
  /** User message with the audio placeholder and optional context block. */
  user: string;
}

function substituteContext(template: string, context: string): string {
  const marker = "{context}";
  const at = template.indexOf(marker);
  if (at < 0) throw new Error(`template has no ${marker} placeholder`);
  return template.slice(0, at) + context + template.slice(at + marker.length);
}

export function buildTranscriptionPrompt(
  template: ModelTemplate,
  context: string,
): TranscriptionPrompt {
  const hasContext = context.length > 0;
  if (template === "phi4") {
    return {
      user: hasContext
        ? substituteContext(PHI4_WITH_CONTEXT, context)
        : PHI4_NO_CONTEXT,
    };
  }
  return {
    system: QWEN_SYSTEM,
    user: hasContext
      ? substituteContext(QWEN_USER_WITH_CONTEXT, context)
      : QWEN_USER_NO_CONTEXT,
  };
}

export const SENTENCE_PROMPT = `Here is a sentence from a spoken transcript:
"{transcript}"

Write exactly one short, natural sentence that:
- fits the same topic and register as the transcript
- uses the word "{word}" in the same role and context as it is used above

Return only the sentence, no explanation.`;

export const FILLER_PROMPT = `Here is a sentence from a spoken transcript:
"{transcript}"

Write exactly {n} short, natural sentences that:
- fit the same topic and register as the transcript
- do not contain the words "{acoustic_word}" or "{context_word}"

Return exactly {n} sentences, one per line, no numbering, no explanation.`;

export function buildSentencePrompt(transcript: string, word: string): string {
  return SENTENCE_PROMPT.replace("{transcript}", transcript).replace(
    "{word}",
    word,
  );
}

export function buildFillerPrompt(
  transcript: string,
  n: number,
  acousticWord: string,
  contextWord: string,
): string {
  return FILLER_PROMPT.replace("{transcript}", transcript)
    .replaceAll("{n}", String(n))
    .replace("{acoustic_word}", acousticWord)
    .replace("{context_word}", contextWord);
}

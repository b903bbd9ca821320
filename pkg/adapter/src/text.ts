/**
 * Token-level containment checks mirroring the scorer's published
 * normalization policy: lowercase, punctuation stripped except intra-word
 * apostrophes and hyphens, whitespace split.
 */

export function normalizeTokens(text: string): string[] {
  const lowered = text.toLowerCase().replace(/’/g, "'");
  const pieces = lowered.split(/[^\p{L}\p{N}'-]+|_+/u);
  const tokens: string[] = [];
  for (const piece of pieces) {
    const token = piece.replace(/^['-]+|['-]+$/g, "");
    if (token) tokens.push(token);
  }
  return tokens;
}

export function containsWord(text: string, word: string): boolean {
  const tokens = normalizeTokens(text);
  const pattern = normalizeTokens(word);
  if (pattern.length === 0) return false;
  outer: for (let i = 0; i + pattern.length <= tokens.length; i++) {
    for (let j = 0; j < pattern.length; j++) {
      if (tokens[i + j] !== pattern[j]) continue outer;
    }
    return true;
  }
  return false;
}

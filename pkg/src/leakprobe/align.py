"""Text normalization, word-level Levenshtein alignment with backtrace, WER.

Normalization policy (fixed, echoed in report headers): lowercase,
punctuation stripped except intra-word apostrophes and hyphens,
whitespace-split, Unicode letters preserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence


class EmptyReferenceError(ValueError):
    """WER is undefined for an empty reference."""


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]
    raw: str = ""

    def __len__(self) -> int:
        return len(self.tokens)


# Anything that is not a word character, apostrophe or hyphen splits tokens;
# underscores are punctuation for our purposes even though \w matches them.
_NON_TOKEN_RE = re.compile(r"[^\w'\-]+|_+", re.UNICODE)
_EDGE_PUNCT_RE = re.compile(r"^['\-]+|['\-]+$")


def normalize(text: str) -> TokenSeq:
    """Lowercase, strip punctuation (keeping intra-word ' and -), split."""
    lowered = text.lower().replace("\u2019", "'")
    tokens = []
    for piece in _NON_TOKEN_RE.split(lowered):
        token = _EDGE_PUNCT_RE.sub("", piece)
        if token:
            tokens.append(token)
    return TokenSeq(tuple(tokens), raw=text)


def _tokens(seq: "TokenSeq | Sequence[str]") -> tuple[str, ...]:
    if isinstance(seq, TokenSeq):
        return seq.tokens
    return tuple(seq)


MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"


@dataclass(frozen=True)
class AlignOp:
    kind: str
    ref_index: int | None = None
    hyp_index: int | None = None


@dataclass
class Alignment:
    ops: list[AlignOp]
    distance: int

    def ref_to_hyp(self) -> dict[int, AlignOp]:
        """Map each reference index to the op that consumed it."""
        return {op.ref_index: op for op in self.ops if op.ref_index is not None}


def align_words(ref: "TokenSeq | Sequence[str]",
                hyp: "TokenSeq | Sequence[str]") -> Alignment:
    """Minimum-edit-distance word alignment.

    Backtrace tie-break prefers match > substitute > delete > insert, so the
    alignment is deterministic across runs and platforms.
    """
    r = _tokens(ref)
    h = _tokens(hyp)
    n, m = len(r), len(h)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        ri = r[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ri != h[j - 1])
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = min(sub, dele, ins)
    ops: list[AlignOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        cost = dist[i][j]
        if i > 0 and j > 0 and r[i - 1] == h[j - 1] and cost == dist[i - 1][j - 1]:
            ops.append(AlignOp(MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and cost == dist[i - 1][j - 1] + 1:
            ops.append(AlignOp(SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and cost == dist[i - 1][j] + 1:
            ops.append(AlignOp(DELETE, i - 1, None))
            i = i - 1
        else:
            ops.append(AlignOp(INSERT, None, j - 1))
            j = j - 1
    ops.reverse()
    return Alignment(ops=ops, distance=dist[n][m])


@dataclass(frozen=True)
class WerResult:
    substitutions: int
    deletions: int
    insertions: int
    n_ref: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        return self.errors / self.n_ref


def wer(ref: "TokenSeq | Sequence[str]",
        hyp: "TokenSeq | Sequence[str]") -> WerResult:
    """Word error rate (S+D+I)/N from the alignment counts."""
    r = _tokens(ref)
    if not r:
        raise EmptyReferenceError("reference has no tokens")
    alignment = align_words(r, hyp)
    s = sum(1 for op in alignment.ops if op.kind == SUBSTITUTE)
    d = sum(1 for op in alignment.ops if op.kind == DELETE)
    ins = sum(1 for op in alignment.ops if op.kind == INSERT)
    return WerResult(s, d, ins, len(r))

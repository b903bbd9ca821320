"""Leakage metrics: masked background WER, acoustic accuracy, leakage rate.

A shared sentinel token replaces masked words so that masked reference and
hypothesis positions align as matches; a leaked word therefore cannot change
the background WER. Alignment for acoustic-position lookup always runs on
unmasked text; masking exists only inside background_wer.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .align import DELETE, TokenSeq, align_words, normalize, wer

MASK_TOKEN = "⟨mask⟩"  # ⟨mask⟩


def _as_token_tuple(word: "str | Sequence[str]") -> tuple[str, ...]:
    if isinstance(word, str):
        return normalize(word).tokens
    return tuple(word)


def mask_tokens(seq: TokenSeq, words: Iterable["str | Sequence[str]"]) -> TokenSeq:
    """Replace every occurrence of each word (as a contiguous token
    subsequence) by the single shared sentinel token.

    Overlaps resolve left to right, preferring the longest pattern at each
    position; raw strings are normalized first.
    """
    patterns = {p for p in (_as_token_tuple(w) for w in words) if p}
    ordered = sorted(patterns, key=lambda p: (-len(p), p))
    toks = seq.tokens
    out: list[str] = []
    i = 0
    n = len(toks)
    while i < n:
        for pat in ordered:
            if toks[i:i + len(pat)] == pat:
                out.append(MASK_TOKEN)
                i += len(pat)
                break
        else:
            out.append(toks[i])
            i += 1
    return TokenSeq(tuple(out), raw=seq.raw)


def background_wer(ref: TokenSeq, hyp: TokenSeq,
                   acoustic_word: str, context_word: str) -> float:
    """WER after masking the acoustic word in the reference and both pair
    words in the hypothesis, isolating general quality from leakage."""
    masked_ref = mask_tokens(ref, [acoustic_word])
    masked_hyp = mask_tokens(hyp, [acoustic_word, context_word])
    return wer(masked_ref, masked_hyp).rate


def find_occurrences(tokens: Sequence[str], pattern: Sequence[str]) -> list[int]:
    """Start indices of non-overlapping occurrences, scanned left to right."""
    pat = tuple(pattern)
    if not pat:
        return []
    toks = tuple(tokens)
    starts: list[int] = []
    i = 0
    n = len(toks)
    k = len(pat)
    while i + k <= n:
        if toks[i:i + k] == pat:
            starts.append(i)
            i += k
        else:
            i += 1
    return starts


@dataclass(frozen=True)
class ItemScore:
    n_positions: int
    acoustic_matches: int
    leakage_matches: int
    flagged: bool = False  # acoustic word absent from the reference


def score_item(ref: TokenSeq, hyp: TokenSeq,
               acoustic_word: str, context_word: str) -> ItemScore:
    """Compare the hypothesis span aligned to each acoustic-word occurrence.

    The span is the contiguous hypothesis slice covering every token aligned
    (matched or substituted) to the occurrence; a fully deleted occurrence,
    or a span equal to neither pair word, counts as neither.
    """
    wa = _as_token_tuple(acoustic_word)
    wc = _as_token_tuple(context_word)
    starts = find_occurrences(ref.tokens, wa)
    if not starts:
        return ItemScore(0, 0, 0, flagged=True)
    by_ref = align_words(ref, hyp).ref_to_hyp()
    acoustic = 0
    leakage = 0
    for start in starts:
        span_ops = [by_ref[i] for i in range(start, start + len(wa))]
        hyp_indices = [op.hyp_index for op in span_ops if op.kind != DELETE]
        if not hyp_indices:
            continue
        hyp_span = hyp.tokens[min(hyp_indices):max(hyp_indices) + 1]
        if hyp_span == wa:
            acoustic += 1
        elif hyp_span == wc:
            leakage += 1
    return ItemScore(len(starts), acoustic, leakage)


@dataclass
class ScoreRecord:
    item_id: str
    condition_id: str
    model: str
    dataset: str
    n_positions: int
    acoustic_matches: int
    leakage_matches: int
    background_wer: float
    similarity: float
    similarity_bucket: str
    phoneme_distance: int
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "record": "score",
            "item_id": self.item_id,
            "condition_id": self.condition_id,
            "model": self.model,
            "dataset": self.dataset,
            "n_positions": self.n_positions,
            "acoustic_matches": self.acoustic_matches,
            "leakage_matches": self.leakage_matches,
            "background_wer": self.background_wer,
            "similarity": self.similarity,
            "similarity_bucket": self.similarity_bucket,
            "phoneme_distance": self.phoneme_distance,
            "flags": self.flags,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScoreRecord":
        return cls(
            item_id=obj["item_id"],
            condition_id=obj["condition_id"],
            model=obj["model"],
            dataset=obj.get("dataset", "other"),
            n_positions=obj["n_positions"],
            acoustic_matches=obj["acoustic_matches"],
            leakage_matches=obj["leakage_matches"],
            background_wer=obj["background_wer"],
            similarity=obj.get("similarity", 0.0),
            similarity_bucket=obj.get("similarity_bucket", ""),
            phoneme_distance=obj.get("phoneme_distance", 0),
            flags=list(obj.get("flags", [])),
        )


@dataclass(frozen=True)
class AggregateReport:
    group: tuple
    key_fields: tuple[str, ...]
    n_items: int
    n_scored: int
    n_positions: int
    acoustic_accuracy: float
    leakage_rate: float
    macro_acoustic_accuracy: float
    macro_leakage_rate: float
    mean_background_wer: float


def aggregate(records: Iterable[ScoreRecord],
              keys: Sequence[str]) -> tuple[list[AggregateReport], list[str]]:
    """Group records by the given fields and compute micro and macro ratios.

    Micro ratios sum matches over summed positions; macro ratios average
    per-item ratios over items with at least one position. Groups where no
    item has a position are omitted, with a warning.
    """
    key_fields = tuple(keys)
    groups: dict[tuple, list[ScoreRecord]] = defaultdict(list)
    for rec in records:
        groups[tuple(getattr(rec, k) for k in key_fields)].append(rec)
    reports: list[AggregateReport] = []
    warnings: list[str] = []
    for group in sorted(groups):
        recs = groups[group]
        scored = [r for r in recs if r.n_positions > 0]
        total_positions = sum(r.n_positions for r in scored)
        if total_positions == 0:
            warnings.append(
                f"group {dict(zip(key_fields, group))} omitted: no acoustic-word positions")
            continue
        acoustic = sum(r.acoustic_matches for r in scored)
        leakage = sum(r.leakage_matches for r in scored)
        reports.append(AggregateReport(
            group=group,
            key_fields=key_fields,
            n_items=len(recs),
            n_scored=len(scored),
            n_positions=total_positions,
            acoustic_accuracy=acoustic / total_positions,
            leakage_rate=leakage / total_positions,
            macro_acoustic_accuracy=(
                sum(r.acoustic_matches / r.n_positions for r in scored) / len(scored)),
            macro_leakage_rate=(
                sum(r.leakage_matches / r.n_positions for r in scored) / len(scored)),
            mean_background_wer=sum(r.background_wer for r in recs) / len(recs),
        ))
    return reports, warnings

"""Evaluation manifest model, validation, context assembly, stratification.

Manifests are JSONL (UTF-8, one object per line) with an optional leading
header record carrying the schema version. Context assembly is seeded per
(global seed, item, condition) so datasets regenerate identically across
machines and worker counts.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .align import normalize
from .metrics import find_occurrences
from .pairminer import WordPair

MANIFEST_SCHEMA = "leakprobe-manifest"
MANIFEST_VERSION = 1

CONTEXT_MODES = ("none", "word", "sent1", "sent5", "sent10")
SENTENCE_COUNTS = {"sent1": 1, "sent5": 5, "sent10": 10}
DATASETS = ("FLEURS", "ACL6060", "VoxPopuli", "other")
N_FILLERS = 9

SIMILARITY_BUCKETS = ("Distinct", "Related", "Similar")


class ManifestError(ValueError):
    """Fatal manifest problem (strict mode or unreadable input)."""


class InsufficientFillers(ValueError):
    """An item does not carry enough filler sentences for the condition."""


@dataclass(frozen=True)
class Condition:
    context_mode: str
    mitigation: bool = False
    customisation: str = "base"

    def __post_init__(self) -> None:
        if self.context_mode not in CONTEXT_MODES:
            raise ValueError(f"unknown context mode: {self.context_mode!r}")
        if self.mitigation and self.context_mode == "none":
            raise ValueError("mitigation requires some context")

    @property
    def condition_id(self) -> str:
        return self.context_mode + ("+mit" if self.mitigation else "")


def all_conditions(customisation: str = "base") -> list[Condition]:
    """The nine canonical condition cells: five context amounts, with a
    mitigation variant for every mode that carries context."""
    conditions = []
    for mode in CONTEXT_MODES:
        conditions.append(Condition(mode, False, customisation))
        if mode != "none":
            conditions.append(Condition(mode, True, customisation))
    return conditions


def parse_condition_id(condition_id: str, customisation: str = "base") -> Condition:
    mode, _, suffix = condition_id.partition("+")
    if suffix not in ("", "mit"):
        raise ValueError(f"unknown condition id: {condition_id!r}")
    return Condition(mode, suffix == "mit", customisation)


@dataclass
class EvalItem:
    item_id: str
    dataset: str
    reference_transcript: str
    pair: WordPair
    context_sentence: str
    acoustic_sentence: str
    filler_sentences: list[str]
    audio_path: str | None = None
    audio_duration_s: float | None = None

    def to_json(self) -> dict:
        obj = {
            "record": "item",
            "item_id": self.item_id,
            "dataset": self.dataset,
            "reference_transcript": self.reference_transcript,
            "acoustic_word": self.pair.acoustic_word,
            "context_word": self.pair.context_word,
            "phoneme_distance": self.pair.phoneme_distance,
            "context_sentence": self.context_sentence,
            "acoustic_sentence": self.acoustic_sentence,
            "filler_sentences": list(self.filler_sentences),
        }
        if self.audio_path is not None:
            obj["audio_path"] = self.audio_path
        if self.audio_duration_s is not None:
            obj["audio_duration_s"] = self.audio_duration_s
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "EvalItem":
        pair = WordPair(
            acoustic_word=obj["acoustic_word"],
            context_word=obj["context_word"],
            phoneme_distance=obj["phoneme_distance"],
            source_dataset=obj.get("dataset", "other"),
        )
        return cls(
            item_id=obj["item_id"],
            dataset=obj["dataset"],
            reference_transcript=obj["reference_transcript"],
            pair=pair,
            context_sentence=obj["context_sentence"],
            acoustic_sentence=obj["acoustic_sentence"],
            filler_sentences=list(obj["filler_sentences"]),
            audio_path=obj.get("audio_path"),
            audio_duration_s=obj.get("audio_duration_s"),
        )


_REQUIRED_FIELDS = (
    "item_id", "dataset", "reference_transcript", "acoustic_word",
    "context_word", "phoneme_distance", "context_sentence",
    "acoustic_sentence", "filler_sentences",
)


@dataclass(frozen=True)
class Violation:
    item_id: str
    rule: str
    detail: str = ""


@dataclass
class ValidationReport:
    n_lines: int = 0
    n_items: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def contains_word(text: str, word: str) -> bool:
    """True when the normalized word appears as a token subsequence."""
    tokens = normalize(text).tokens
    pattern = normalize(word).tokens
    return bool(pattern) and bool(find_occurrences(tokens, pattern))


def validate_item(item: EvalItem) -> list[Violation]:
    violations = []
    wa = item.pair.acoustic_word
    wc = item.pair.context_word
    if item.dataset not in DATASETS:
        violations.append(Violation(item.item_id, "unknown-dataset", item.dataset))
    if not normalize(item.reference_transcript).tokens:
        violations.append(Violation(item.item_id, "empty-reference"))
    elif not contains_word(item.reference_transcript, wa):
        violations.append(Violation(item.item_id, "acoustic-word-missing", wa))
    if normalize(wa).tokens == normalize(wc).tokens:
        violations.append(Violation(item.item_id, "pair-words-equal", wa))
    if item.pair.phoneme_distance not in (1, 2):
        violations.append(Violation(
            item.item_id, "phoneme-distance-out-of-range",
            str(item.pair.phoneme_distance)))
    if not contains_word(item.context_sentence, wc):
        violations.append(Violation(
            item.item_id, "context-sentence-missing-context-word", wc))
    if not contains_word(item.acoustic_sentence, wa):
        violations.append(Violation(
            item.item_id, "acoustic-sentence-missing-acoustic-word", wa))
    if len(item.filler_sentences) != N_FILLERS:
        violations.append(Violation(
            item.item_id, "filler-count", str(len(item.filler_sentences))))
    for i, filler in enumerate(item.filler_sentences):
        if contains_word(filler, wa):
            violations.append(Violation(
                item.item_id, "filler-contains-acoustic-word", f"filler {i}"))
        if contains_word(filler, wc):
            violations.append(Violation(
                item.item_id, "filler-contains-context-word", f"filler {i}"))
    if item.audio_duration_s is not None and item.audio_duration_s < 0:
        violations.append(Violation(
            item.item_id, "negative-audio-duration", str(item.audio_duration_s)))
    return violations


def load_manifest(path: str | Path,
                  strict: bool = False) -> tuple[list[EvalItem], ValidationReport]:
    """Parse and validate a manifest. In strict mode any malformed line or
    invariant violation raises ManifestError after collection."""
    report = ValidationReport()
    items: list[EvalItem] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            report.n_lines += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                if strict:
                    raise ManifestError(f"{path}:{line_no}: malformed JSON: {exc}") from exc
                report.violations.append(
                    Violation(f"line-{line_no}", "malformed-json", str(exc)))
                continue
            if not isinstance(obj, dict):
                report.violations.append(
                    Violation(f"line-{line_no}", "malformed-json", "not an object"))
                continue
            if "schema" in obj and obj.get("record") != "item":
                if obj["schema"] != MANIFEST_SCHEMA:
                    raise ManifestError(
                        f"{path}: unexpected schema {obj['schema']!r}")
                continue
            missing = [f for f in _REQUIRED_FIELDS if f not in obj]
            if missing:
                item_id = str(obj.get("item_id", f"line-{line_no}"))
                report.violations.extend(
                    Violation(item_id, f"missing-field:{name}") for name in missing)
                continue
            item = EvalItem.from_json(obj)
            report.n_items += 1
            report.violations.extend(validate_item(item))
            items.append(item)
    if strict and report.violations:
        summary = "; ".join(f"{v.item_id}: {v.rule}" for v in report.violations[:5])
        raise ManifestError(
            f"{path}: {len(report.violations)} validation violation(s): {summary} ...")
    return items, report


def write_manifest(path: str | Path, items: Iterable[EvalItem]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {"record": "header", "schema": MANIFEST_SCHEMA,
                  "version": MANIFEST_VERSION}
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for item in items:
            fh.write(json.dumps(item.to_json(), ensure_ascii=False) + "\n")


def stable_item_seed(global_seed: int, item_id: str, condition_id: str) -> int:
    """Published seed derivation: SHA-256 of "v1|seed|item|condition"."""
    payload = f"v1|{global_seed}|{item_id}|{condition_id}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def assemble_context(item: EvalItem, cond: Condition, global_seed: int = 0,
                     separator: str = " ") -> str:
    """Build the prompt context string for one (item, condition) cell.

    Sentence modes place the target sentence (and under mitigation also the
    acoustic-word sentence) at seeded-random slots among leading fillers;
    sentences are joined by single spaces unless a separator is given.
    """
    mode = cond.context_mode
    if mode == "none":
        return ""
    wa = item.pair.acoustic_word
    wc = item.pair.context_word
    if mode == "word":
        return f"{wc}, {wa}" if cond.mitigation else wc
    targets = [item.context_sentence]
    if cond.mitigation:
        targets.append(item.acoustic_sentence)
    total = SENTENCE_COUNTS[mode]
    if mode == "sent1" and cond.mitigation:
        total = 2
    n_fillers = total - len(targets)
    if n_fillers > len(item.filler_sentences):
        raise InsufficientFillers(
            f"{item.item_id}: {cond.condition_id} needs {n_fillers} fillers, "
            f"item has {len(item.filler_sentences)}")
    rng = random.Random(stable_item_seed(global_seed, item.item_id, cond.condition_id))
    slots = rng.sample(range(total), len(targets))
    out: list[str | None] = [None] * total
    for sentence, slot in zip(targets, slots):
        out[slot] = sentence
    fillers = iter(item.filler_sentences[:n_fillers])
    for i in range(total):
        if out[i] is None:
            out[i] = next(fillers)
    return separator.join(out)  # type: ignore[arg-type]


def _collapse(text: str) -> str:
    return " ".join(text.lower().split())


def _lcs_length(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        curr = [0]
        append = curr.append
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                append(prev[j - 1] + 1)
            else:
                left = curr[j - 1]
                up = prev[j]
                append(left if left >= up else up)
        prev = curr
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """Character-overlap ratio 2*LCS/(|a|+|b|) on lowercased,
    whitespace-collapsed strings; 1.0 when both are empty."""
    na = _collapse(a)
    nb = _collapse(b)
    if not na and not nb:
        return 1.0
    if not na or not nb:
        return 0.0
    return 2 * _lcs_length(na, nb) / (len(na) + len(nb))


def stratify(ratio: float) -> str:
    """Similarity bucket: Distinct (<=0.4), Related (0.4-0.7], Similar (>0.7)."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"similarity ratio out of range: {ratio}")
    if ratio <= 0.4:
        return "Distinct"
    if ratio <= 0.7:
        return "Related"
    return "Similar"


@dataclass
class StatBucket:
    n_pairs: int = 0
    n_distance1: int = 0
    n_distance2: int = 0
    n_distance_other: int = 0
    total_audio_s: float = 0.0
    n_with_audio: int = 0

    @property
    def mean_audio_s(self) -> float | None:
        if self.n_with_audio == 0:
            return None
        return self.total_audio_s / self.n_with_audio

    def add(self, item: EvalItem) -> None:
        self.n_pairs += 1
        if item.pair.phoneme_distance == 1:
            self.n_distance1 += 1
        elif item.pair.phoneme_distance == 2:
            self.n_distance2 += 1
        else:
            self.n_distance_other += 1
        if item.audio_duration_s is not None:
            self.total_audio_s += item.audio_duration_s
            self.n_with_audio += 1


@dataclass
class DatasetStats:
    overall: StatBucket = field(default_factory=StatBucket)
    per_dataset: dict[str, StatBucket] = field(default_factory=dict)


def dataset_stats(items: Iterable[EvalItem]) -> DatasetStats:
    stats = DatasetStats()
    for item in items:
        stats.overall.add(item)
        stats.per_dataset.setdefault(item.dataset, StatBucket()).add(item)
    return stats

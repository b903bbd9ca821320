"""Mine phonetically confusable context-word candidates for named entities.

For each in-lexicon entity, every clean dictionary headword within the
distance cap that satisfies the enabled constraints is a candidate. The
first-phoneme constraint binds the pronunciation pair that achieves the
minimum distance, so candidates found through the same-first-phoneme index
are re-checked against the unconstrained minimum before they are emitted.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .phonedist import DistanceConfig, banded_levenshtein, comparison_key
from .pronlex import Lexicon
from .stemmer import same_stem

SELECTION_MODES = ("best-one", "all-candidates")


@dataclass(frozen=True)
class MiningConfig:
    max_distance: int = 2
    require_same_first_phoneme: bool = True
    exclude_same_stem: bool = True
    exclude_non_alphabetic: bool = True
    selection: str = "best-one"
    min_token_length: int = 3
    strip_stress: bool = True

    def __post_init__(self) -> None:
        if self.max_distance < 1:
            raise ValueError("max_distance must be >= 1")
        if self.selection not in SELECTION_MODES:
            raise ValueError(f"selection must be one of {SELECTION_MODES}")

    @property
    def standard_distance_range(self) -> bool:
        """Distance caps above 2 are allowed but flagged in reports."""
        return self.max_distance in (1, 2)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class WordPair:
    acoustic_word: str
    context_word: str
    phoneme_distance: int
    source_dataset: str = ""

    def to_json(self) -> dict:
        return {
            "record": "pair",
            "acoustic_word": self.acoustic_word,
            "context_word": self.context_word,
            "phoneme_distance": self.phoneme_distance,
            "source_dataset": self.source_dataset,
        }


@dataclass(frozen=True)
class SkipRecord:
    entity: str
    dataset: str
    reason: str


@dataclass(frozen=True)
class SplitRecord:
    entity: str
    tokens: tuple[str, ...]


@dataclass
class MiningReport:
    n_entities: int = 0
    n_tokens_mined: int = 0
    skips: list[SkipRecord] = field(default_factory=list)
    splits: list[SplitRecord] = field(default_factory=list)


def multi_token_entity_policy(entity: str) -> list[str]:
    """Split multi-word entities; tokens shorter than 3 characters are
    dropped. An empty result means the entity is rejected."""
    return [t.lower() for t in entity.split() if len(t) >= 3]


class _LexIndex:
    """Per-pronunciation buckets keyed by (first phoneme, length) or length."""

    def __init__(self, lex: Lexicon, cfg: MiningConfig):
        self.cfg = cfg
        self.words: list[str] = []
        self.prons: list[list[tuple[str, ...]]] = []
        self.word_ids: dict[str, int] = {}
        self.buckets: dict = {}
        for word, prons in lex.entries.items():
            keys = [comparison_key(p, cfg.strip_stress) for p in prons]
            idx = len(self.words)
            self.words.append(word)
            self.prons.append(keys)
            self.word_ids[word] = idx
            if cfg.exclude_non_alphabetic and not Lexicon.is_clean_headword(word):
                continue  # kept for lookups, excluded as a candidate
            for key in keys:
                bkey = (key[0], len(key)) if cfg.require_same_first_phoneme else len(key)
                self.buckets.setdefault(bkey, []).append((idx, key))

    def entity_keys(self, word: str) -> list[tuple[str, ...]] | None:
        idx = self.word_ids.get(word.upper())
        return None if idx is None else self.prons[idx]


def _min_distance(keys_a: Sequence[tuple], keys_b: Sequence[tuple], cap: int) -> int | None:
    best: int | None = None
    for ka in keys_a:
        for kb in keys_b:
            d = banded_levenshtein(ka, kb, cap)
            if d is not None and (best is None or d < best):
                best = d
                if best == 0:
                    return 0
    return best


def _mine_token(index: _LexIndex, cfg: MiningConfig,
                token: str) -> "list[tuple[str, int]] | None":
    """Candidates (context word, distance) for one entity token, sorted by
    (distance, word); None when the token is not in the lexicon."""
    entity_keys = index.entity_keys(token)
    if entity_keys is None:
        return None
    cap = cfg.max_distance
    entity_upper = token.upper()
    best: dict[int, int] = {}
    for ek in entity_keys:
        length = len(ek)
        for cand_len in range(max(1, length - cap), length + cap + 1):
            bkey = (ek[0], cand_len) if cfg.require_same_first_phoneme else cand_len
            for idx, ck in index.buckets.get(bkey, ()):
                d = banded_levenshtein(ek, ck, cap)
                if d is not None and (idx not in best or d < best[idx]):
                    best[idx] = d
    candidates: list[tuple[str, int]] = []
    for idx, d_bucket in best.items():
        word = index.words[idx]
        if word == entity_upper:
            continue
        if cfg.require_same_first_phoneme:
            d_true = _min_distance(entity_keys, index.prons[idx], cap)
            if d_true != d_bucket:
                continue  # the true minimum is only reached with a different first phoneme
        else:
            d_true = d_bucket
        if d_true is None or d_true < 1:
            continue
        if cfg.exclude_same_stem and same_stem(token, word):
            continue
        candidates.append((word.lower(), d_true))
    candidates.sort(key=lambda c: (c[1], c[0]))
    return candidates


_FORK_STATE: dict = {}


def _mine_token_forked(token: str):
    return _mine_token(_FORK_STATE["index"], _FORK_STATE["cfg"], token)


def mine_pairs(entities: Iterable[tuple[str, str]], lex: Lexicon,
               cfg: MiningConfig = MiningConfig(),
               workers: int = 1) -> tuple[list[WordPair], MiningReport]:
    """Mine context-word candidates for each entity.

    Entities are (word, dataset tag) pairs, deduplicated case-insensitively
    (first tag wins) after multi-word splitting. Output is sorted by
    (acoustic word, distance, context word) and is identical for any worker
    count.
    """
    report = MiningReport()
    worklist: list[str] = []
    tag_of: dict[str, str] = {}
    seen: set[str] = set()
    for entity, dataset in entities:
        report.n_entities += 1
        tokens = multi_token_entity_policy(entity)
        if not tokens:
            report.skips.append(SkipRecord(entity, dataset, "all-tokens-too-short"))
            continue
        if len(tokens) > 1 or tokens[0] != entity.lower():
            report.splits.append(SplitRecord(entity, tuple(tokens)))
        for token in tokens:
            if token in seen:
                continue
            seen.add(token)
            worklist.append(token)
            tag_of[token] = dataset
    index = _LexIndex(lex, cfg)
    report.n_tokens_mined = len(worklist)
    if workers > 1 and len(worklist) > 1:
        _FORK_STATE["index"] = index
        _FORK_STATE["cfg"] = cfg
        try:
            ctx = multiprocessing.get_context("fork")
            chunk = max(1, len(worklist) // (workers * 4))
            with ctx.Pool(workers) as pool:
                results = pool.map(_mine_token_forked, worklist, chunksize=chunk)
        finally:
            _FORK_STATE.clear()
    else:
        results = [_mine_token(index, cfg, token) for token in worklist]
    pairs: list[WordPair] = []
    for token, candidates in zip(worklist, results):
        dataset = tag_of[token]
        if candidates is None:
            report.skips.append(SkipRecord(token, dataset, "not-in-lexicon"))
            continue
        if cfg.selection == "best-one":
            candidates = candidates[:1]
        pairs.extend(WordPair(token, cand, d, dataset) for cand, d in candidates)
    pairs.sort(key=lambda p: (p.acoustic_word, p.phoneme_distance, p.context_word))
    return pairs, report


def verify_pair(pair: WordPair, lex: Lexicon, cfg: MiningConfig) -> bool:
    """Independent re-check of every enabled predicate for an emitted pair."""
    dist_cfg = DistanceConfig(strip_stress=cfg.strip_stress,
                              max_distance=cfg.max_distance)
    prons_a = lex.lookup(pair.acoustic_word)
    prons_c = lex.lookup(pair.context_word)
    if not prons_a or not prons_c:
        return False
    if pair.acoustic_word.lower() == pair.context_word.lower():
        return False
    keys_a = [comparison_key(p, cfg.strip_stress) for p in prons_a]
    keys_c = [comparison_key(p, cfg.strip_stress) for p in prons_c]
    d = _min_distance(keys_a, keys_c, dist_cfg.max_distance)
    if d != pair.phoneme_distance or not 1 <= d <= cfg.max_distance:
        return False
    if cfg.require_same_first_phoneme:
        if not any(ka[0] == kc[0]
                   and banded_levenshtein(ka, kc, cfg.max_distance) == d
                   for ka in keys_a for kc in keys_c):
            return False
    if cfg.exclude_same_stem and same_stem(pair.acoustic_word, pair.context_word):
        return False
    if cfg.exclude_non_alphabetic and not Lexicon.is_clean_headword(
            pair.context_word.upper()):
        return False
    return True

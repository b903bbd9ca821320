from __future__ import annotations

import random

import pytest

from leakprobe.pairminer import (
    MiningConfig,
    WordPair,
    mine_pairs,
    multi_token_entity_policy,
    verify_pair,
)
from leakprobe.pronlex import parse_lexicon

from .oracles import brute_force_mine

SYMBOLS = ["B", "D", "K", "L", "M", "N", "P", "R", "S", "T",
           "AA1", "AE1", "AH0", "EH1", "IY1", "OW1"]


def synthetic_lexicon(n_words: int = 160, seed: int = 11):
    """Deterministic fixture lexicon with alternates, homophones, plural
    families and dirty headwords."""
    rng = random.Random(seed)
    lines = []
    seen = set()
    while len(seen) < n_words:
        length = rng.randint(3, 8)
        word = "".join(rng.choice("bdklmnprst") + rng.choice("aeiou")
                       for _ in range(length))[:length].upper()
        if word in seen or not word:
            continue
        seen.add(word)
        pron = " ".join(rng.choice(SYMBOLS) for _ in range(rng.randint(2, 7)))
        lines.append(f"{word}  {pron}")
        if rng.random() < 0.15:
            alt = " ".join(rng.choice(SYMBOLS) for _ in range(rng.randint(2, 7)))
            lines.append(f"{word}(1)  {alt}")
    # same-pronunciation homophone pair to exercise the distance >= 1 rule
    lines.append("BAKER  B EY1 K ER0")
    lines.append("BAKOR  B EY1 K ER0")
    # plural family sharing a stem
    lines.append("MAT  M AE1 T")
    lines.append("MATS  M AE1 T S")
    # punctuation/digit headwords must never become candidates
    lines.append("'MAT  M AE1 T")
    lines.append("MAT2  M AE1 T UW0")
    return parse_lexicon(lines)


def test_spec_fixture_without_first_phoneme_constraint(fixture_lexicon):
    cfg = MiningConfig(require_same_first_phoneme=False, selection="all-candidates")
    pairs, _ = mine_pairs([("texas", "FLEURS")], fixture_lexicon, cfg)
    got = {(p.acoustic_word, p.context_word, p.phoneme_distance) for p in pairs}
    assert ("texas", "nexus", 1) in got
    assert ("texas", "taxes", 2) in got


def test_spec_fixture_with_first_phoneme_constraint(fixture_lexicon):
    cfg = MiningConfig(require_same_first_phoneme=True, selection="all-candidates")
    pairs, _ = mine_pairs([("texas", "FLEURS")], fixture_lexicon, cfg)
    words = {p.context_word for p in pairs}
    assert "nexus" not in words  # first phonemes T vs N differ
    assert "taxes" in words


def test_best_one_selection(fixture_lexicon):
    cfg = MiningConfig(require_same_first_phoneme=False, selection="best-one")
    pairs, _ = mine_pairs([("texas", "FLEURS")], fixture_lexicon, cfg)
    assert len(pairs) == 1
    assert pairs[0] == WordPair("texas", "nexus", 1, "FLEURS")


def test_out_of_lexicon_entity_skipped(fixture_lexicon):
    pairs, report = mine_pairs([("zzxqv", "FLEURS")], fixture_lexicon, MiningConfig())
    assert pairs == []
    assert [(s.entity, s.reason) for s in report.skips] == [("zzxqv", "not-in-lexicon")]


def test_empty_entity_list(fixture_lexicon):
    pairs, report = mine_pairs([], fixture_lexicon, MiningConfig())
    assert pairs == [] and report.n_entities == 0


def test_same_stem_excluded(fixture_lexicon):
    cfg = MiningConfig(require_same_first_phoneme=True, selection="all-candidates")
    pairs, _ = mine_pairs([("taxes", "FLEURS")], fixture_lexicon, cfg)
    words = {p.context_word for p in pairs}
    assert "tax" not in words  # morphological variant
    relaxed = MiningConfig(require_same_first_phoneme=True,
                           exclude_same_stem=False, selection="all-candidates")
    pairs2, _ = mine_pairs([("taxes", "FLEURS")], fixture_lexicon, relaxed)
    assert "tax" in {p.context_word for p in pairs2}


def test_multi_token_entity_policy():
    assert multi_token_entity_policy("New York") == ["new", "york"]
    assert multi_token_entity_policy("EU") == []
    assert multi_token_entity_policy("Nexus") == ["nexus"]


def test_multi_token_entities_split_and_recorded(fixture_lexicon):
    pairs, report = mine_pairs([("Texas Nexus", "VoxPopuli")], fixture_lexicon,
                               MiningConfig(require_same_first_phoneme=False,
                                            selection="all-candidates"))
    assert report.splits and report.splits[0].tokens == ("texas", "nexus")
    assert {p.acoustic_word for p in pairs} == {"texas", "nexus"}


def test_case_insensitive_dedup_keeps_first_tag(fixture_lexicon):
    cfg = MiningConfig(require_same_first_phoneme=False, selection="best-one")
    pairs, report = mine_pairs(
        [("Texas", "FLEURS"), ("TEXAS", "VoxPopuli")], fixture_lexicon, cfg)
    assert len(pairs) == 1
    assert pairs[0].source_dataset == "FLEURS"
    assert report.n_tokens_mined == 1


def test_invalid_config():
    with pytest.raises(ValueError):
        MiningConfig(max_distance=0)
    with pytest.raises(ValueError):
        MiningConfig(selection="everything")
    assert not MiningConfig(max_distance=3).standard_distance_range


@pytest.mark.parametrize("require_first", [True, False])
@pytest.mark.parametrize("max_distance", [1, 2])
def test_completeness_equals_brute_force(require_first, max_distance):
    lex = synthetic_lexicon()
    assert len(lex) <= 200
    cfg = MiningConfig(max_distance=max_distance,
                       require_same_first_phoneme=require_first,
                       selection="all-candidates")
    rng = random.Random(5)
    entities = [(w.lower(), "other") for w in rng.sample(sorted(lex.entries), 30)]
    pairs, _ = mine_pairs(entities, lex, cfg)
    mined = {}
    for p in pairs:
        mined.setdefault(p.acoustic_word, set()).add((p.context_word, p.phoneme_distance))
    for entity, _tag in entities:
        expected = brute_force_mine(entity, lex, cfg)
        assert mined.get(entity, set()) == expected, entity


def test_soundness_every_pair_reverifies():
    lex = synthetic_lexicon()
    cfg = MiningConfig(selection="all-candidates")
    entities = [(w.lower(), "other") for w in sorted(lex.entries)[:40]]
    pairs, _ = mine_pairs(entities, lex, cfg)
    assert pairs
    assert all(verify_pair(p, lex, cfg) for p in pairs)


def test_homophones_excluded():
    lex = synthetic_lexicon()
    cfg = MiningConfig(require_same_first_phoneme=False, selection="all-candidates",
                       exclude_same_stem=False)
    pairs, _ = mine_pairs([("baker", "other")], lex, cfg)
    by_word = {p.context_word: p.phoneme_distance for p in pairs}
    assert "bakor" not in by_word  # identical pronunciation, distance 0


def test_dirty_headwords_never_candidates():
    lex = synthetic_lexicon()
    cfg = MiningConfig(require_same_first_phoneme=False, selection="all-candidates",
                       exclude_same_stem=False)
    pairs, _ = mine_pairs([("mat", "other")], lex, cfg)
    words = {p.context_word for p in pairs}
    assert "'mat" not in words and "mat2" not in words
    assert "mats" in words  # clean candidate, stem exclusion off


def test_determinism_across_worker_counts():
    lex = synthetic_lexicon()
    cfg = MiningConfig(selection="all-candidates")
    entities = [(w.lower(), "other") for w in sorted(lex.entries)[:40]]
    serial, _ = mine_pairs(entities, lex, cfg, workers=1)
    parallel, _ = mine_pairs(entities, lex, cfg, workers=2)
    assert serial == parallel


def test_output_sorted(fixture_lexicon):
    cfg = MiningConfig(require_same_first_phoneme=False, selection="all-candidates")
    pairs, _ = mine_pairs([("texas", "a"), ("baker", "b")], fixture_lexicon, cfg)
    keys = [(p.acoustic_word, p.phoneme_distance, p.context_word) for p in pairs]
    assert keys == sorted(keys)

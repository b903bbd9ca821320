from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from leakprobe.corpus import (
    Condition,
    EvalItem,
    InsufficientFillers,
    ManifestError,
    all_conditions,
    assemble_context,
    dataset_stats,
    load_manifest,
    parse_condition_id,
    similarity,
    stable_item_seed,
    stratify,
    validate_item,
    write_manifest,
)
from leakprobe.pairminer import WordPair

from .oracles import naive_lcs_length


def make_item(**overrides) -> EvalItem:
    fields = dict(
        item_id="t1",
        dataset="FLEURS",
        reference_transcript="We visited Texas yesterday.",
        pair=WordPair("texas", "nexus", 1, "FLEURS"),
        context_sentence="The Nexus initiative stays confidential.",
        acoustic_sentence="Many flights go to Texas.",
        filler_sentences=[f"Filler number {i}." for i in range(1, 10)],
        audio_path=None,
        audio_duration_s=None,
    )
    fields.update(overrides)
    return EvalItem(**fields)


# ------------------------------------------------------------------ Condition


def test_condition_ids():
    assert Condition("none").condition_id == "none"
    assert Condition("sent5", True).condition_id == "sent5+mit"
    assert parse_condition_id("sent5+mit") == Condition("sent5", True)
    assert parse_condition_id("word") == Condition("word")


def test_condition_validation():
    with pytest.raises(ValueError):
        Condition("none", mitigation=True)
    with pytest.raises(ValueError):
        Condition("sent3")
    with pytest.raises(ValueError):
        parse_condition_id("sent5+foo")


def test_all_conditions():
    ids = [c.condition_id for c in all_conditions()]
    assert ids == ["none", "word", "word+mit", "sent1", "sent1+mit",
                   "sent5", "sent5+mit", "sent10", "sent10+mit"]


# ----------------------------------------------------------- assemble_context


def test_assemble_none_and_word():
    item = make_item()
    assert assemble_context(item, Condition("none")) == ""
    assert assemble_context(item, Condition("word")) == "nexus"
    assert assemble_context(item, Condition("word", True)) == "nexus, texas"


def test_assemble_sent1():
    item = make_item()
    assert assemble_context(item, Condition("sent1")) == item.context_sentence
    mit = assemble_context(item, Condition("sent1", True), 3)
    assert sorted(mit.split(". ")) != []  # both sentences present, any order
    assert item.context_sentence in mit and item.acoustic_sentence in mit


def split_sentences(ctx: str) -> list[str]:
    return [p if p.endswith(".") else p + "." for p in ctx.split(". ")]


def test_assemble_sentence_counts():
    item = make_item()
    for mode, k in (("sent5", 5), ("sent10", 10)):
        for mitigation in (False, True):
            ctx = assemble_context(item, Condition(mode, mitigation), 9)
            sentences = split_sentences(ctx)
            n_targets = 2 if mitigation else 1
            assert len(sentences) == k
            assert (item.context_sentence in ctx) and \
                (mitigation == (item.acoustic_sentence in ctx))
            fillers = [s for s in sentences
                       if s not in (item.context_sentence, item.acoustic_sentence)]
            assert len(fillers) == k - n_targets
            # filler order is preserved around the inserted targets
            assert fillers == item.filler_sentences[:k - n_targets]


def test_assemble_deterministic_and_seed_sensitive():
    item = make_item()
    cond = Condition("sent5")
    a = assemble_context(item, cond, 42)
    assert a == assemble_context(item, cond, 42)
    outputs = {assemble_context(item, cond, seed) for seed in range(30)}
    assert len(outputs) > 1  # placement really is randomized by seed


def test_assemble_independent_of_other_items():
    a = make_item(item_id="a")
    b = make_item(item_id="b")
    assert assemble_context(a, Condition("sent5"), 1) != \
        assemble_context(b, Condition("sent5"), 1) or a.item_id == b.item_id


def test_assemble_insufficient_fillers():
    item = make_item(filler_sentences=["Only one filler."])
    with pytest.raises(InsufficientFillers):
        assemble_context(item, Condition("sent5"), 0)


def test_stable_item_seed_is_stable():
    assert stable_item_seed(42, "t1", "sent5") == stable_item_seed(42, "t1", "sent5")
    assert stable_item_seed(42, "t1", "sent5") != stable_item_seed(43, "t1", "sent5")
    assert stable_item_seed(42, "t1", "sent5") != stable_item_seed(42, "t2", "sent5")


# ----------------------------------------------------------------- similarity


def test_similarity_examples():
    assert similarity("same text", "same text") == 1.0
    assert similarity("abc", "xyz") == 0.0
    assert similarity("kitten", "sitting") == pytest.approx(8 / 13)


def test_similarity_whitespace_and_case_normalized():
    assert similarity("A  b\tC", "a b c") == 1.0


texts = st.text(alphabet=st.sampled_from("ab c"), max_size=12)


@given(texts, texts)
def test_similarity_symmetric(a, b):
    assert similarity(a, b) == similarity(b, a)


@given(texts, texts)
def test_similarity_matches_naive_lcs(a, b):
    na = " ".join(a.lower().split())
    nb = " ".join(b.lower().split())
    if not na and not nb:
        assert similarity(a, b) == 1.0
    elif not na or not nb:
        assert similarity(a, b) == 0.0
    else:
        expected = 2 * naive_lcs_length(na, nb) / (len(na) + len(nb))
        assert similarity(a, b) == pytest.approx(expected)


@given(texts, texts)
def test_similarity_one_iff_equal_normalized(a, b):
    sim = similarity(a, b)
    equal = " ".join(a.lower().split()) == " ".join(b.lower().split())
    assert (sim == 1.0) == equal


def test_stratify_boundaries():
    assert stratify(0.4) == "Distinct"
    assert stratify(0.7) == "Related"
    assert stratify(0.70001) == "Similar"
    assert stratify(0.0) == "Distinct"
    assert stratify(0.95) == "Similar"
    assert stratify(1.0) == "Similar"
    with pytest.raises(ValueError):
        stratify(1.5)


# ----------------------------------------------------------------- validation


def test_valid_item_has_no_violations():
    assert validate_item(make_item()) == []


def test_reference_missing_acoustic_word():
    item = make_item(reference_transcript="We stayed home.")
    assert any(v.rule == "acoustic-word-missing" for v in validate_item(item))


def test_filler_contains_context_word():
    fillers = [f"Filler number {i}." for i in range(1, 9)] + ["A nexus appears."]
    item = make_item(filler_sentences=fillers)
    assert any(v.rule == "filler-contains-context-word" for v in validate_item(item))


def test_filler_contains_acoustic_word():
    fillers = [f"Filler number {i}." for i in range(1, 9)] + ["Texas again."]
    item = make_item(filler_sentences=fillers)
    assert any(v.rule == "filler-contains-acoustic-word" for v in validate_item(item))


def test_context_sentence_must_contain_context_word():
    item = make_item(context_sentence="Nothing to see.")
    assert any(v.rule == "context-sentence-missing-context-word"
               for v in validate_item(item))


def test_acoustic_sentence_must_contain_acoustic_word():
    item = make_item(acoustic_sentence="Nothing spoken.")
    assert any(v.rule == "acoustic-sentence-missing-acoustic-word"
               for v in validate_item(item))


def test_filler_count_checked():
    item = make_item(filler_sentences=["One.", "Two."])
    assert any(v.rule == "filler-count" for v in validate_item(item))


def test_pair_words_equal_flagged():
    item = make_item(pair=WordPair("texas", "Texas", 1, "FLEURS"))
    assert any(v.rule == "pair-words-equal" for v in validate_item(item))


def test_distance_out_of_range_flagged():
    item = make_item(pair=WordPair("texas", "nexus", 3, "FLEURS"))
    assert any(v.rule == "phoneme-distance-out-of-range" for v in validate_item(item))


def test_unknown_dataset_flagged():
    item = make_item(dataset="LIBRI")
    assert any(v.rule == "unknown-dataset" for v in validate_item(item))


# -------------------------------------------------------------- manifest io


def test_load_manifest_fixture(manifest12, manifest12_path):
    assert len(manifest12) == 12
    assert manifest12[0].pair.acoustic_word == "texas"


def test_manifest_round_trip(tmp_path, manifest12):
    path = tmp_path / "copy.jsonl"
    write_manifest(path, manifest12)
    items, report = load_manifest(path)
    assert report.ok
    assert [i.to_json() for i in items] == [i.to_json() for i in manifest12]


def test_malformed_json_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"schema": "leakprobe-manifest", "version": 1}\nnot json\n')
    items, report = load_manifest(path)
    assert any(v.rule == "malformed-json" for v in report.violations)
    with pytest.raises(ManifestError):
        load_manifest(path, strict=True)


def test_strict_mode_raises_on_violations(tmp_path):
    item = make_item(reference_transcript="We stayed home.")
    path = tmp_path / "viol.jsonl"
    write_manifest(path, [item])
    with pytest.raises(ManifestError):
        load_manifest(path, strict=True)


def test_missing_fields_reported(tmp_path):
    path = tmp_path / "missing.jsonl"
    path.write_text(json.dumps({"item_id": "x", "dataset": "FLEURS"}) + "\n")
    items, report = load_manifest(path)
    assert items == []
    assert any(v.rule.startswith("missing-field:") for v in report.violations)


def test_unexpected_schema_rejected(tmp_path):
    path = tmp_path / "weird.jsonl"
    path.write_text('{"schema": "other-things", "version": 9}\n')
    with pytest.raises(ManifestError):
        load_manifest(path)


# -------------------------------------------------------------------- stats


def test_dataset_stats_fixture(manifest12):
    stats = dataset_stats(manifest12)
    assert stats.overall.n_pairs == 12
    assert stats.overall.n_distance1 == 8
    assert stats.overall.n_distance2 == 4
    assert stats.overall.total_audio_s == 120.0
    assert stats.overall.mean_audio_s == 12.0
    assert stats.per_dataset["FLEURS"].n_pairs == 5
    assert stats.per_dataset["ACL6060"].n_pairs == 2
    assert stats.per_dataset["VoxPopuli"].n_pairs == 4
    assert stats.per_dataset["other"].n_pairs == 1


def test_dataset_stats_empty():
    stats = dataset_stats([])
    assert stats.overall.n_pairs == 0
    assert stats.overall.mean_audio_s is None
    assert stats.per_dataset == {}


def test_assemble_separator_configurable():
    item = make_item()
    spaced = assemble_context(item, Condition("sent5"), 7)
    newlined = assemble_context(item, Condition("sent5"), 7, separator="\n")
    assert spaced.replace(" ", "\n").count("\n") >= newlined.count("\n")
    assert newlined.split("\n") == split_sentences(spaced)

"""Command-line surface, scoring pipeline orchestration, report emission.

Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .align import TokenSeq, normalize
from .corpus import (
    Condition,
    ManifestError,
    assemble_context,
    dataset_stats,
    load_manifest,
    similarity,
    stratify,
)
from .metrics import ScoreRecord, aggregate, background_wer, score_item
from .pairminer import MiningConfig, mine_pairs
from .phonedist import DistanceConfig, WordNotFound, min_word_distance
from .pronlex import LexiconFormatError, lexicon_stats, load_lexicon
from .reports import (
    CONTEXTS_SCHEMA,
    PAIRS_SCHEMA,
    SCHEMA_VERSION,
    SCORES_SCHEMA,
    NORMALIZATION_POLICY,
    SEED_DERIVATION,
    SIMILARITY_FORMULA,
    aggregate_rows,
    file_sha256,
    read_jsonl,
    write_csv,
    write_jsonl,
    write_markdown_table,
)
from .stemmer import stem

DICT_ENV_VAR = "LEAKPROBE_DICT"

_CONDITION_ORDER = ("none", "word", "word+mit", "sent1", "sent1+mit",
                    "sent5", "sent5+mit", "sent10", "sent10+mit")


def condition_sort_key(condition_id: str) -> tuple[int, str]:
    try:
        return (_CONDITION_ORDER.index(condition_id), condition_id)
    except ValueError:
        return (len(_CONDITION_ORDER), condition_id)


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _dict_path(args) -> Path:
    path = args.dict or os.environ.get(DICT_ENV_VAR)
    if not path:
        print(f"error: no dictionary given (use --dict or ${DICT_ENV_VAR})",
              file=sys.stderr)
        raise SystemExit(2)
    return Path(path)


# ---------------------------------------------------------------- lex / dist


def cmd_lex_stats(args) -> int:
    try:
        lexicon = load_lexicon(args.file)
    except (OSError, LexiconFormatError) as exc:
        return _fail(str(exc))
    for key, value in lexicon_stats(lexicon).items():
        print(f"{key}: {value}")
    return 0


def cmd_dist(args) -> int:
    try:
        lexicon = load_lexicon(_dict_path(args))
    except (OSError, LexiconFormatError) as exc:
        return _fail(str(exc))
    cfg = DistanceConfig(strip_stress=not args.keep_stress,
                         max_distance=args.max_distance)
    try:
        d = min_word_distance(lexicon, args.word1, args.word2, cfg)
    except WordNotFound as exc:
        print(f"not-in-lexicon: {exc.word}")
        return 0
    print(d if d is not None else f"exceeds-cap({cfg.max_distance})")
    return 0


def cmd_stem(args) -> int:
    print(stem(args.word))
    return 0


# ----------------------------------------------------------------------- mine


def _load_entities(path: Path) -> list[tuple[str, str]]:
    entities = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            word, _, dataset = line.partition("\t")
            entities.append((word.strip(), dataset.strip() or "other"))
    return entities


def cmd_mine(args) -> int:
    try:
        lexicon = load_lexicon(_dict_path(args))
        entities = _load_entities(Path(args.entities))
    except (OSError, LexiconFormatError) as exc:
        return _fail(str(exc))
    cfg = MiningConfig(
        max_distance=args.max_distance,
        require_same_first_phoneme=not args.no_first_phoneme,
        exclude_same_stem=not args.keep_same_stem,
        selection="all-candidates" if args.all_candidates else "best-one",
        strip_stress=not args.keep_stress,
    )
    if not cfg.standard_distance_range:
        _warn(f"max_distance={cfg.max_distance} is outside the standard range (1-2); "
              "output is flagged in the header")
    pairs, report = mine_pairs(entities, lexicon, cfg, workers=args.workers)
    header = {
        "record": "header",
        "schema": PAIRS_SCHEMA,
        "version": SCHEMA_VERSION,
        "tool_version": __version__,
        "dict_source": lexicon.source,
        "dict_sha256": lexicon.sha256,
        "config": cfg.to_json(),
        "standard_distance_range": cfg.standard_distance_range,
        "n_entities": report.n_entities,
        "n_tokens_mined": report.n_tokens_mined,
        "n_pairs": len(pairs),
        "n_skips": len(report.skips),
    }
    records: list[dict] = [pair.to_json() for pair in pairs]
    records.extend({"record": "skip", "entity": s.entity, "dataset": s.dataset,
                    "reason": s.reason}
                   for s in sorted(report.skips, key=lambda s: (s.entity, s.reason)))
    records.extend({"record": "split", "entity": s.entity, "tokens": list(s.tokens)}
                   for s in sorted(report.splits, key=lambda s: s.entity))
    write_jsonl(Path(args.output), header, records)
    print(f"mined {len(pairs)} pairs from {report.n_tokens_mined} tokens "
          f"({len(report.skips)} skipped) -> {args.output}")
    return 0


# ----------------------------------------------------- validate / stats


def cmd_validate(args) -> int:
    try:
        items, report = load_manifest(args.manifest, strict=args.strict)
    except (OSError, ManifestError) as exc:
        return _fail(str(exc))
    for violation in report.violations:
        print(f"{violation.item_id}: {violation.rule}"
              + (f" ({violation.detail})" if violation.detail else ""))
    print(f"{report.n_items} item(s), {len(report.violations)} violation(s)")
    return 0 if report.ok else 1


def cmd_stats(args) -> int:
    try:
        items, report = load_manifest(args.manifest)
    except (OSError, ManifestError) as exc:
        return _fail(str(exc))
    if not report.ok:
        _warn(f"{len(report.violations)} validation violation(s); run `leakprobe validate`")
    stats = dataset_stats(items)
    buckets = [("all", stats.overall)]
    buckets.extend(sorted(stats.per_dataset.items()))
    if args.json:
        payload = {}
        for name, bucket in buckets:
            payload[name] = {
                "n_pairs": bucket.n_pairs,
                "n_distance1": bucket.n_distance1,
                "n_distance2": bucket.n_distance2,
                "n_distance_other": bucket.n_distance_other,
                "total_audio_s": bucket.total_audio_s,
                "mean_audio_s": bucket.mean_audio_s,
            }
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0
    for name, bucket in buckets:
        mean = f"{bucket.mean_audio_s:.1f}s" if bucket.mean_audio_s is not None else "n/a"
        line = (f"{name}: {bucket.n_pairs} pairs "
                f"(distance 1/2: {bucket.n_distance1}/{bucket.n_distance2}"
                + (f", other: {bucket.n_distance_other}" if bucket.n_distance_other else "")
                + f"), audio total {bucket.total_audio_s:.1f}s, avg {mean}")
        print(line)
    return 0


# ------------------------------------------------------------------ contexts


def cmd_contexts(args) -> int:
    try:
        items, report = load_manifest(args.manifest)
    except (OSError, ManifestError) as exc:
        return _fail(str(exc))
    if not report.ok:
        _warn(f"{len(report.violations)} validation violation(s)")
    try:
        cond = Condition(args.mode, mitigation=args.mitigation)
    except ValueError as exc:
        return _fail(str(exc))
    header = {
        "record": "header",
        "schema": CONTEXTS_SCHEMA,
        "version": SCHEMA_VERSION,
        "tool_version": __version__,
        "manifest_sha256": file_sha256(args.manifest),
        "seed": args.seed,
        "condition_id": cond.condition_id,
        "seed_derivation": SEED_DERIVATION,
    }
    records = []
    for item in items:
        records.append({
            "record": "context",
            "item_id": item.item_id,
            "condition_id": cond.condition_id,
            "context": assemble_context(item, cond, args.seed),
        })
    write_jsonl(Path(args.output), header, records)
    print(f"wrote {len(records)} contexts -> {args.output}")
    return 0


# --------------------------------------------------------------------- score


@dataclass(frozen=True)
class HypothesisRecord:
    item_id: str
    condition_id: str
    text: str
    model: str


def load_hypotheses(path: str | Path) -> list[HypothesisRecord]:
    """Read hypothesis JSONL; (item_id, condition_id, model) must be unique."""
    _, rows = read_jsonl(path)
    records = []
    seen: set[tuple[str, str, str]] = set()
    for row in rows:
        if row.get("record") not in (None, "hypothesis"):
            continue
        try:
            rec = HypothesisRecord(
                item_id=str(row["item_id"]),
                condition_id=str(row["condition_id"]),
                text=str(row.get("text", "")),
                model=str(row.get("model", "unknown")),
            )
        except KeyError as exc:
            raise ManifestError(f"{path}: hypothesis record missing {exc}") from exc
        key = (rec.item_id, rec.condition_id, rec.model)
        if key in seen:
            raise ManifestError(f"{path}: duplicate hypothesis {key}")
        seen.add(key)
        records.append(rec)
    return records


@dataclass(frozen=True)
class _PreparedItem:
    item_id: str
    dataset: str
    ref: TokenSeq
    acoustic_word: str
    context_word: str
    phoneme_distance: int
    similarity: float
    similarity_bucket: str


def _prepare_items(items) -> dict[str, _PreparedItem]:
    prepared = {}
    for item in items:
        sim = similarity(item.context_sentence, item.reference_transcript)
        prepared[item.item_id] = _PreparedItem(
            item_id=item.item_id,
            dataset=item.dataset,
            ref=normalize(item.reference_transcript),
            acoustic_word=item.pair.acoustic_word,
            context_word=item.pair.context_word,
            phoneme_distance=item.pair.phoneme_distance,
            similarity=sim,
            similarity_bucket=stratify(sim),
        )
    return prepared


def _score_record(prep: _PreparedItem, hyp: HypothesisRecord) -> ScoreRecord:
    flags = []
    if not hyp.text.strip():
        flags.append("empty-hypothesis")
    hyp_tokens = normalize(hyp.text)
    item_score = score_item(prep.ref, hyp_tokens,
                            prep.acoustic_word, prep.context_word)
    if item_score.flagged:
        flags.append("no-acoustic-occurrence")
    return ScoreRecord(
        item_id=prep.item_id,
        condition_id=hyp.condition_id,
        model=hyp.model,
        dataset=prep.dataset,
        n_positions=item_score.n_positions,
        acoustic_matches=item_score.acoustic_matches,
        leakage_matches=item_score.leakage_matches,
        background_wer=background_wer(prep.ref, hyp_tokens,
                                      prep.acoustic_word, prep.context_word),
        similarity=prep.similarity,
        similarity_bucket=prep.similarity_bucket,
        phoneme_distance=prep.phoneme_distance,
        flags=flags,
    )


_SCORE_STATE: dict = {}


def _score_forked(task: HypothesisRecord) -> ScoreRecord:
    return _score_record(_SCORE_STATE["items"][task.item_id], task)


def run_scoring(items, hypotheses: Sequence[HypothesisRecord], strict: bool = False,
                workers: int = 1) -> tuple[list[ScoreRecord], list[str]]:
    """Score every hypothesis against its manifest item.

    Returns records sorted by (model, condition, item) plus warnings;
    unknown item ids are fatal in strict mode, skipped with a warning
    otherwise. Deterministic for any worker count.
    """
    prepared = _prepare_items(items)
    warnings: list[str] = []
    tasks: list[HypothesisRecord] = []
    for hyp in hypotheses:
        if hyp.item_id not in prepared:
            if strict:
                raise ManifestError(f"hypothesis references unknown item {hyp.item_id!r}")
            warnings.append(f"unknown item {hyp.item_id!r}: hypothesis skipped")
            continue
        if not hyp.text.strip():
            warnings.append(
                f"empty hypothesis for ({hyp.item_id}, {hyp.condition_id}, {hyp.model})")
        tasks.append(hyp)
    tasks.sort(key=lambda h: (h.model, condition_sort_key(h.condition_id), h.item_id))
    covered = {t.item_id for t in tasks}
    missing = len(prepared) - len(covered)
    if missing:
        warnings.append(f"{missing} manifest item(s) have no hypothesis")
    if workers > 1 and len(tasks) > 1:
        _SCORE_STATE["items"] = prepared
        try:
            ctx = multiprocessing.get_context("fork")
            chunk = max(1, len(tasks) // (workers * 4))
            with ctx.Pool(workers) as pool:
                records = pool.map(_score_forked, tasks, chunksize=chunk)
        finally:
            _SCORE_STATE.clear()
    else:
        records = [_score_record(prepared[t.item_id], t) for t in tasks]
    return records, warnings


def write_score_reports(outdir: Path, records: list[ScoreRecord],
                        meta: dict, fmt: str = "all") -> list[Path]:
    """Emit scores.jsonl, aggregate tables, stratified views, trade-off CSV.

    `fmt` limits the aggregate outputs: "jsonl" writes only the per-record
    file, "csv" adds the CSV tables, "markdown" the Markdown report; "all"
    (default) writes everything.
    """
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    scores_path = outdir / "scores.jsonl"
    header = {"record": "header", "schema": SCORES_SCHEMA,
              "version": SCHEMA_VERSION, "n_records": len(records), **meta}
    write_jsonl(scores_path, header, (r.to_json() for r in records))
    written.append(scores_path)
    if fmt == "jsonl":
        return written

    by_condition, agg_warnings = aggregate(records, ("model", "condition_id"))
    by_condition.sort(key=lambda r: (r.group[0], condition_sort_key(r.group[1])))
    by_bucket, _ = aggregate(records, ("model", "condition_id", "similarity_bucket"))
    by_bucket.sort(key=lambda r: (r.group[0], condition_sort_key(r.group[1]), r.group[2]))
    by_distance, _ = aggregate(records, ("model", "condition_id", "phoneme_distance"))
    by_distance.sort(key=lambda r: (r.group[0], condition_sort_key(r.group[1]), r.group[2]))
    for warning in agg_warnings:
        _warn(warning)

    if fmt in ("csv", "all"):
        for name, reports in (("aggregate.csv", by_condition),
                              ("by_similarity.csv", by_bucket),
                              ("by_distance.csv", by_distance)):
            columns, rows = aggregate_rows(reports)
            path = outdir / name
            write_csv(path, meta, columns, rows)
            written.append(path)

        tradeoff_path = outdir / "tradeoff.csv"
        write_csv(tradeoff_path, meta,
                  ("model", "condition_id", "leakage_rate", "acoustic_accuracy"),
                  [[r.group[0], r.group[1], r.leakage_rate, r.acoustic_accuracy]
                   for r in by_condition])
        written.append(tradeoff_path)

    if fmt not in ("markdown", "all"):
        return written

    md_lines = ["# Leakage scoring report", ""]
    md_lines.extend(f"- {key}: {value}" for key, value in meta.items())
    md_lines.append("")
    for title, reports in (("Metrics by condition", by_condition),
                           ("Stratified by context-reference similarity", by_bucket),
                           ("Stratified by phoneme distance", by_distance)):
        md_lines.append(f"## {title}")
        md_lines.append("")
        columns, rows = aggregate_rows(reports)
        write_markdown_table(md_lines, columns, rows)
        md_lines.append("")
    md_path = outdir / "aggregate.md"
    md_path.write_text("\n".join(md_lines), encoding="utf-8")
    written.append(md_path)
    return written


def cmd_score(args) -> int:
    try:
        items, report = load_manifest(args.manifest, strict=args.strict)
        hypotheses = load_hypotheses(args.hypotheses)
    except (OSError, ManifestError) as exc:
        return _fail(str(exc))
    if not report.ok:
        _warn(f"manifest has {len(report.violations)} validation violation(s)")
    if args.conditions:
        wanted = set(args.conditions.split(","))
        hypotheses = [h for h in hypotheses if h.condition_id in wanted]
    try:
        records, warnings = run_scoring(items, hypotheses, strict=args.strict,
                                        workers=args.workers)
    except ManifestError as exc:
        return _fail(str(exc))
    for warning in warnings:
        _warn(warning)
    meta = {
        "tool_version": __version__,
        "manifest_sha256": file_sha256(args.manifest),
        "hypotheses_sha256": file_sha256(args.hypotheses),
        "seed": args.seed,
        "similarity_formula": SIMILARITY_FORMULA,
        "normalization": NORMALIZATION_POLICY,
    }
    written = write_score_reports(Path(args.output), records, meta, fmt=args.format)
    print(f"scored {len(records)} hypothesis(es); wrote "
          + ", ".join(str(p) for p in written))
    return 0


# -------------------------------------------------------------------- report


def cmd_report(args) -> int:
    merged: dict[tuple[str, str], list[ScoreRecord]] = {}
    origin: dict[tuple[str, str], int] = {}
    for file_no, path in enumerate(args.scores):
        try:
            header, rows = read_jsonl(path)
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            return _fail(f"{path}: {exc}")
        if header is None or header.get("schema") != SCORES_SCHEMA:
            return _fail(f"{path}: not a {SCORES_SCHEMA} file")
        if header.get("version") != SCHEMA_VERSION:
            return _fail(f"{path}: schema version {header.get('version')} != {SCHEMA_VERSION}")
        for row in rows:
            if row.get("record") != "score":
                continue
            rec = ScoreRecord.from_json(row)
            key = (rec.model, rec.condition_id)
            if origin.setdefault(key, file_no) != file_no:
                return _fail(
                    f"conflicting duplicate (model, condition) {key}: "
                    f"{args.scores[origin[key]]} and {path}")
            merged.setdefault(key, []).append(rec)
    records = [rec for recs in merged.values() for rec in recs]
    reports, warnings = aggregate(records, ("model", "condition_id"))
    for warning in warnings:
        _warn(warning)
    models = sorted({r.group[0] for r in reports})
    conditions = sorted({r.group[1] for r in reports}, key=condition_sort_key)
    cell = {(r.group[0], r.group[1]): r for r in reports}
    lines = ["# Model comparison", "",
             f"- tool_version: {__version__}",
             f"- inputs: {', '.join(str(p) for p in args.scores)}", ""]
    metric_fields = (("Acoustic accuracy", "acoustic_accuracy"),
                     ("Leakage rate", "leakage_rate"),
                     ("Background WER", "mean_background_wer"))
    for title, fieldname in metric_fields:
        lines.append(f"## {title}")
        lines.append("")
        columns = ["condition"] + models
        rows = []
        for cond in conditions:
            row: list[object] = [cond]
            for model in models:
                rep = cell.get((model, cond))
                row.append(getattr(rep, fieldname) if rep is not None else "-")
            rows.append(row)
        write_markdown_table(lines, columns, rows)
        lines.append("")
    output = Path(args.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text("\n".join(lines), encoding="utf-8")
    print(f"wrote {output}")
    return 0


# ---------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leakprobe",
        description=("Mine phonetically confusable word pairs and score "
                     "speech-recognizer transcripts for context-induced leakage."))
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    lex = sub.add_parser("lex", help="pronouncing-dictionary utilities")
    lex_sub = lex.add_subparsers(dest="lex_command", required=True)
    lex_stats = lex_sub.add_parser("stats", help="summarize a dictionary file")
    lex_stats.add_argument("file")
    lex_stats.set_defaults(func=cmd_lex_stats)

    dist = sub.add_parser("dist", help="phoneme edit distance between two words")
    dist.add_argument("word1")
    dist.add_argument("word2")
    dist.add_argument("--dict", help=f"dictionary path (default ${DICT_ENV_VAR})")
    dist.add_argument("--keep-stress", action="store_true",
                      help="compare stress digits as part of the phonemes")
    dist.add_argument("--max-distance", type=int, default=2)
    dist.set_defaults(func=cmd_dist)

    stem_p = sub.add_parser("stem", help="Porter stem of a word")
    stem_p.add_argument("word")
    stem_p.set_defaults(func=cmd_stem)

    mine = sub.add_parser("mine", help="mine confusable context words for entities")
    mine.add_argument("--entities", required=True,
                      help="TSV file: word<TAB>dataset")
    mine.add_argument("--dict", help=f"dictionary path (default ${DICT_ENV_VAR})")
    mine.add_argument("--max-distance", type=int, default=2)
    mine.add_argument("--no-first-phoneme", action="store_true",
                      help="drop the same-first-phoneme constraint")
    mine.add_argument("--all-candidates", action="store_true",
                      help="emit every candidate instead of the best one")
    mine.add_argument("--keep-same-stem", action="store_true",
                      help="keep morphological variants of the entity")
    mine.add_argument("--keep-stress", action="store_true")
    mine.add_argument("--workers", type=int, default=1)
    mine.add_argument("-o", "--output", required=True)
    mine.set_defaults(func=cmd_mine)

    validate = sub.add_parser("validate", help="check a manifest against its invariants")
    validate.add_argument("manifest")
    validate.add_argument("--strict", action="store_true")
    validate.set_defaults(func=cmd_validate)

    stats = sub.add_parser("stats", help="dataset statistics for a manifest")
    stats.add_argument("manifest")
    stats.add_argument("--json", action="store_true")
    stats.set_defaults(func=cmd_stats)

    contexts = sub.add_parser("contexts", help="assemble prompt contexts")
    contexts.add_argument("manifest")
    contexts.add_argument("--mode", required=True,
                          choices=("none", "word", "sent1", "sent5", "sent10"))
    contexts.add_argument("--mitigation", action="store_true")
    contexts.add_argument("--seed", type=int, default=0)
    contexts.add_argument("-o", "--output", required=True)
    contexts.set_defaults(func=cmd_contexts)

    score = sub.add_parser("score", help="score hypotheses against a manifest")
    score.add_argument("--manifest", required=True)
    score.add_argument("--hypotheses", required=True)
    score.add_argument("--conditions", help="comma-separated condition_id filter")
    score.add_argument("--seed", type=int, default=0)
    score.add_argument("--strict", action="store_true")
    score.add_argument("--format", choices=("csv", "markdown", "jsonl", "all"),
                       default="all", help="which aggregate reports to write")
    score.add_argument("--workers", type=int, default=1)
    score.add_argument("-o", "--output", required=True, help="output directory")
    score.set_defaults(func=cmd_score)

    report = sub.add_parser("report", help="merge score files into comparison tables")
    report.add_argument("scores", nargs="+")
    report.add_argument("-o", "--output", default="report.md")
    report.set_defaults(func=cmd_report)

    return parser


def main(argv: "Sequence[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

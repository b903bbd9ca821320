"""Report emission: provenance headers, CSV/Markdown tables, JSONL files.

Every report carries a provenance header echoing the under-specified knobs
(seed, similarity formula, normalization policy, input hashes) so results
are auditable. Headers contain no timestamps: repeated runs on identical
inputs must produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .metrics import AggregateReport

SCORES_SCHEMA = "leakprobe-scores"
CONTEXTS_SCHEMA = "leakprobe-contexts"
PAIRS_SCHEMA = "leakprobe-pairs"
SCHEMA_VERSION = 1

SIMILARITY_FORMULA = "2*LCS_char(norm(a),norm(b))/(len(norm(a))+len(norm(b)))"
NORMALIZATION_POLICY = ("lowercase; strip punctuation except intra-word "
                        "apostrophes and hyphens; whitespace split")
SEED_DERIVATION = "sha256('v1|{seed}|{item_id}|{condition_id}')[:8] big-endian"


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def format_value(value) -> str:
    """Floats with 4 decimal places and '.' decimal for stable golden files."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def provenance_lines(meta: Mapping[str, object]) -> list[str]:
    return [f"# {key}: {format_value(value)}" for key, value in meta.items()]


def write_csv(path: Path, meta: Mapping[str, object],
              columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = provenance_lines(meta)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_markdown_table(lines: list[str], columns: Sequence[str],
                         rows: Iterable[Sequence]) -> None:
    lines.append("| " + " | ".join(columns) + " |")
    lines.append("|" + "|".join([" --- "] * len(columns)) + "|")
    for row in rows:
        lines.append("| " + " | ".join(format_value(v) for v in row) + " |")


def write_jsonl(path: Path, header: Mapping[str, object],
                records: Iterable[Mapping]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(dict(header), ensure_ascii=False, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(dict(record), ensure_ascii=False, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> tuple[dict | None, list[dict]]:
    """Split a JSONL file into its optional header record and the rest."""
    header: dict | None = None
    records: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError(f"{path}:{line_no}: not a JSON object")
            if line_no == 1 and ("schema" in obj or obj.get("record") == "header"):
                header = obj
                continue
            records.append(obj)
    return header, records


AGGREGATE_COLUMNS = (
    "n_items", "n_scored", "n_positions",
    "acoustic_accuracy", "leakage_rate",
    "macro_acoustic_accuracy", "macro_leakage_rate",
    "mean_background_wer",
)


def aggregate_rows(reports: Sequence[AggregateReport]) -> tuple[list[str], list[list]]:
    """Flatten AggregateReports to (columns, rows) for CSV/Markdown output."""
    if not reports:
        return [], []
    key_fields = list(reports[0].key_fields)
    columns = key_fields + list(AGGREGATE_COLUMNS)
    rows = []
    for rep in reports:
        rows.append(list(rep.group) + [
            rep.n_items, rep.n_scored, rep.n_positions,
            rep.acoustic_accuracy, rep.leakage_rate,
            rep.macro_acoustic_accuracy, rep.macro_leakage_rate,
            rep.mean_background_wer,
        ])
    return columns, rows

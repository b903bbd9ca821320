"""Parsing and indexing of CMU-format pronouncing dictionaries.

File format: one entry per line, ``WORD  PH1 PH2 ...`` with any run of
whitespace between the headword and the phoneme field. Comment lines start
with ``;;;``. Alternate pronunciations are written ``WORD(1)``, ``WORD(2)``
and are folded under the base headword.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple


class LexiconFormatError(ValueError):
    """Raised when an input stream contains no usable dictionary entries."""


class Phoneme(NamedTuple):
    symbol: str
    stress: int | None = None

    def __str__(self) -> str:
        return self.symbol if self.stress is None else f"{self.symbol}{self.stress}"


Pronunciation = tuple[Phoneme, ...]

_ALTERNATE_RE = re.compile(r"^(?P<base>.*\S)\((?P<index>\d+)\)$")
_PHONEME_RE = re.compile(r"^(?P<symbol>[A-Z]+)(?P<stress>[0-2])?$")
COMMENT_PREFIX = ";;;"


def parse_phoneme(token: str) -> Phoneme:
    """Parse one ARPAbet token, e.g. ``EH1`` -> (EH, stress 1), ``T`` -> (T,)."""
    m = _PHONEME_RE.match(token)
    if m is None:
        raise ValueError(f"not an ARPAbet token: {token!r}")
    stress = m.group("stress")
    return Phoneme(m.group("symbol"), int(stress) if stress is not None else None)


def parse_pronunciation(tokens: Iterable[str]) -> Pronunciation:
    pron = tuple(parse_phoneme(t) for t in tokens)
    if not pron:
        raise ValueError("empty pronunciation")
    return pron


def format_pronunciation(pron: Pronunciation) -> str:
    return " ".join(str(p) for p in pron)


@dataclass(frozen=True)
class ParseIssue:
    line_no: int
    reason: str
    text: str


@dataclass
class ParseReport:
    n_lines: int = 0
    n_comments: int = 0
    n_entries: int = 0
    issues: list[ParseIssue] = field(default_factory=list)

    @property
    def n_malformed(self) -> int:
        return len(self.issues)


def _is_ascii_alpha(word: str) -> bool:
    return word.isascii() and word.isalpha()


@dataclass
class Lexicon:
    """Immutable after construction; safe for concurrent reads.

    ``entries`` maps the uppercase base headword to its pronunciations in
    file order (base entry first, then alternates).
    """

    entries: dict[str, list[Pronunciation]]
    source: str = "<memory>"
    sha256: str | None = None
    report: ParseReport = field(default_factory=ParseReport)

    def lookup(self, word: str) -> list[Pronunciation]:
        """Case-insensitive exact headword match; empty list when absent."""
        return list(self.entries.get(word.upper(), ()))

    def __contains__(self, word: str) -> bool:
        return word.upper() in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def headwords(self) -> Iterator[str]:
        return iter(self.entries)

    @staticmethod
    def is_clean_headword(word: str) -> bool:
        """True for purely alphabetic ASCII headwords (no digits/punctuation)."""
        return _is_ascii_alpha(word)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lexicon):
            return NotImplemented
        return self.entries == other.entries


def _decode(line: str | bytes) -> str:
    if isinstance(line, str):
        return line
    try:
        return line.decode("ascii")
    except UnicodeDecodeError:
        return line.decode("latin-1")


def parse_lexicon(lines: Iterable[str | bytes], source: str = "<memory>",
                  sha256: str | None = None) -> Lexicon:
    """Parse a CMU-format line stream into a Lexicon.

    Malformed lines (no phoneme field, bad phoneme tokens, undecodable bytes)
    are collected as recoverable issues. Raises LexiconFormatError when the
    stream yields no entries at all.
    """
    entries: dict[str, list[Pronunciation]] = {}
    report = ParseReport()
    for line_no, raw in enumerate(lines, start=1):
        report.n_lines += 1
        try:
            line = _decode(raw)
        except UnicodeDecodeError:
            report.issues.append(ParseIssue(line_no, "undecodable", repr(raw)))
            continue
        line = line.rstrip("\n\r")
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith(COMMENT_PREFIX):
            report.n_comments += 1
            continue
        fields = stripped.split()
        if len(fields) < 2:
            report.issues.append(ParseIssue(line_no, "no-phoneme-field", line))
            continue
        headword = fields[0].upper()
        m = _ALTERNATE_RE.match(headword)
        if m is not None:
            headword = m.group("base")
        try:
            pron = parse_pronunciation(fields[1:])
        except ValueError:
            report.issues.append(ParseIssue(line_no, "bad-phoneme-token", line))
            continue
        entries.setdefault(headword, []).append(pron)
        report.n_entries += 1
    if not entries:
        raise LexiconFormatError(f"no dictionary entries found in {source}")
    return Lexicon(entries=entries, source=source, sha256=sha256, report=report)


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a dictionary file (Latin-1 tolerant) and record its SHA-256."""
    path = Path(path)
    data = path.read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    lines = data.decode("latin-1").splitlines()
    return parse_lexicon(lines, source=str(path), sha256=digest)


def to_dict_lines(lexicon: Lexicon) -> Iterator[str]:
    """Serialize back to dictionary format (sorted; alternates as WORD(n))."""
    for word in sorted(lexicon.entries):
        for i, pron in enumerate(lexicon.entries[word]):
            head = word if i == 0 else f"{word}({i})"
            yield f"{head}  {format_pronunciation(pron)}"


def lexicon_stats(lexicon: Lexicon) -> dict:
    """Summary counts for the `lex stats` command."""
    n_prons = sum(len(v) for v in lexicon.entries.values())
    inventory = {p.symbol for prons in lexicon.entries.values()
                 for pron in prons for p in pron}
    n_non_alpha = sum(1 for w in lexicon.entries if not _is_ascii_alpha(w))
    return {
        "source": lexicon.source,
        "sha256": lexicon.sha256,
        "headwords": len(lexicon.entries),
        "pronunciations": n_prons,
        "alternates": n_prons - len(lexicon.entries),
        "phoneme_inventory": len(inventory),
        "non_alphabetic_headwords": n_non_alpha,
        "malformed_lines": lexicon.report.n_malformed,
    }

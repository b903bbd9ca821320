"""Phoneme-level Levenshtein distance between pronunciations and words.

Unit costs (1/1/1) for insertion, deletion, substitution. Distances above
the configured cap are reported as None rather than an inflated number.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .pronlex import Lexicon, Phoneme, Pronunciation


class WordNotFound(KeyError):
    """A queried word has no lexicon entry."""

    def __init__(self, word: str):
        super().__init__(word)
        self.word = word


@dataclass(frozen=True)
class DistanceConfig:
    strip_stress: bool = True
    max_distance: int = 2

    def __post_init__(self) -> None:
        if self.max_distance < 0:
            raise ValueError("max_distance must be >= 0")


def strip_stress(pron: Pronunciation) -> Pronunciation:
    """Same phoneme symbols with all stress digits removed."""
    return tuple(Phoneme(p.symbol) for p in pron)


def comparison_key(pron: Pronunciation, strip: bool = True) -> tuple[str, ...]:
    """Pronunciation as a tuple of comparable strings, e.g. ("T", "EH", ...)."""
    if strip:
        return tuple(p.symbol for p in pron)
    return tuple(str(p) for p in pron)


def banded_levenshtein(a: Sequence, b: Sequence, cap: int) -> int | None:
    """Exact Levenshtein distance when <= cap, else None.

    Only cells within `cap` of the diagonal can lie on a path of cost <= cap,
    so the DP is restricted to that band and exits early when a whole row
    exceeds the cap.
    """
    la, lb = len(a), len(b)
    if abs(la - lb) > cap:
        return None
    if la == 0 or lb == 0:
        return max(la, lb)  # equals the length difference here, <= cap
    inf = cap + 1
    prev = [min(j, inf) for j in range(lb + 1)]
    for i in range(1, la + 1):
        lo = max(1, i - cap)
        hi = min(lb, i + cap)
        curr = [inf] * (lb + 1)
        if lo == 1 and i <= cap:
            curr[0] = i
        ai = a[i - 1]
        row_min = curr[0]
        for j in range(lo, hi + 1):
            v = prev[j - 1] + (ai != b[j - 1])
            up = prev[j] + 1
            if up < v:
                v = up
            left = curr[j - 1] + 1
            if left < v:
                v = left
            curr[j] = v
            if v < row_min:
                row_min = v
        if row_min > cap:
            return None
        prev = curr
    return prev[lb] if prev[lb] <= cap else None


def phoneme_distance(a: Pronunciation, b: Pronunciation,
                     cfg: DistanceConfig = DistanceConfig()) -> int | None:
    """Levenshtein distance between two pronunciations, None above the cap.

    Symmetric; stress digits are stripped first when cfg.strip_stress.
    """
    ka = comparison_key(a, cfg.strip_stress)
    kb = comparison_key(b, cfg.strip_stress)
    return banded_levenshtein(ka, kb, cfg.max_distance)


def min_word_distance(lex: Lexicon, w1: str, w2: str,
                      cfg: DistanceConfig = DistanceConfig()) -> int | None:
    """Minimum phoneme_distance over the pronunciation cross product.

    Raises WordNotFound when either word is absent from the lexicon;
    returns None when every pronunciation pair exceeds the cap.
    """
    prons1 = lex.lookup(w1)
    if not prons1:
        raise WordNotFound(w1)
    prons2 = lex.lookup(w2)
    if not prons2:
        raise WordNotFound(w2)
    best: int | None = None
    for p1 in prons1:
        for p2 in prons2:
            d = phoneme_distance(p1, p2, cfg)
            if d is not None and (best is None or d < best):
                best = d
                if best == 0:
                    return 0
    return best

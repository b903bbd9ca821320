"""leakprobe: phonetic confusability mining and transcription-leakage scoring."""

__version__ = "0.1.0"

from .align import TokenSeq, align_words, normalize, wer
from .corpus import (
    Condition,
    EvalItem,
    assemble_context,
    dataset_stats,
    load_manifest,
    similarity,
    stratify,
)
from .metrics import (
    ScoreRecord,
    aggregate,
    background_wer,
    mask_tokens,
    score_item,
)
from .pairminer import MiningConfig, WordPair, mine_pairs
from .phonedist import DistanceConfig, min_word_distance, phoneme_distance, strip_stress
from .pronlex import Lexicon, Phoneme, load_lexicon, parse_lexicon
from .stemmer import same_stem, stem

__all__ = [
    "__version__",
    "TokenSeq", "align_words", "normalize", "wer",
    "Condition", "EvalItem", "assemble_context", "dataset_stats",
    "load_manifest", "similarity", "stratify",
    "ScoreRecord", "aggregate", "background_wer", "mask_tokens", "score_item",
    "MiningConfig", "WordPair", "mine_pairs",
    "DistanceConfig", "min_word_distance", "phoneme_distance", "strip_stress",
    "Lexicon", "Phoneme", "load_lexicon", "parse_lexicon",
    "same_stem", "stem",
]

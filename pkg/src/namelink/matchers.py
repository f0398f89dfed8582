"""Baseline string scorers and the structure-aware composite scorer.

Edit distance and Jaro-Winkler are delegated to ``rapidfuzz``; Soundex and
the ``indic_lite`` phonetic key are implemented here.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from rapidfuzz.distance import JaroWinkler, Levenshtein
from rapidfuzz.process import cdist

from .errors import EmptyName, UnsupportedScript
from .normalizer import NormalizedName, Script, normalize
from .parser import NameLexicon, analyze, default_lexicon

__all__ = [
    "PhoneticScheme",
    "PhoneticKey",
    "MatcherConstants",
    "edit_distance",
    "levenshtein_similarity",
    "levenshtein_similarity_matrix",
    "jaro_winkler",
    "soundex",
    "indic_lite",
    "phonetic_key",
    "baseline_match",
    "component_similarity",
    "structure_aware_score",
    "require_nonempty",
]

def _text(x) -> str:
    return x.text if isinstance(x, NormalizedName) else x


# ---------------------------------------------------------------------------
# String similarity
# ---------------------------------------------------------------------------


def edit_distance(a, b) -> int:
    return Levenshtein.distance(_text(a), _text(b))


def levenshtein_similarity(a, b) -> float:
    """``1 - distance / max(len)``; two empty strings score 1.0."""
    a, b = _text(a), _text(b)
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - Levenshtein.distance(a, b) / longest


def levenshtein_similarity_matrix(rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
    """Vectorized :func:`levenshtein_similarity` over every (row, col) pair."""
    dist = cdist(rows, cols, scorer=Levenshtein.distance, dtype=np.int32)
    longest = np.maximum.outer(
        np.fromiter((len(r) for r in rows), dtype=np.int32, count=len(rows)),
        np.fromiter((len(c) for c in cols), dtype=np.int32, count=len(cols)),
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = 1.0 - dist / longest
    sim[longest == 0] = 1.0
    return sim


def jaro_winkler(a, b) -> float:
    """Jaro similarity with Winkler prefix boost (prefix <= 4, scale 0.1)."""
    a, b = _text(a), _text(b)
    if a > b:
        # greedy Jaro matching is order sensitive in rare cases
        a, b = b, a
    return JaroWinkler.similarity(a, b, prefix_weight=0.1)


# ---------------------------------------------------------------------------
# Phonetic keys
# ---------------------------------------------------------------------------


class PhoneticScheme(str, enum.Enum):
    SOUNDEX = "soundex"
    INDIC_LITE = "indic_lite"


@dataclass(frozen=True)
class PhoneticKey:
    scheme: PhoneticScheme
    key: str


_SOUNDEX_CODES = {
    **dict.fromkeys("bfpv", "1"),
    **dict.fromkeys("cgjkqsxz", "2"),
    **dict.fromkeys("dt", "3"),
    "l": "4",
    **dict.fromkeys("mn", "5"),
    "r": "6",
}


def _ascii_letters(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text.lower())
    return "".join(ch for ch in decomposed if "a" <= ch <= "z" or ch == " ")


def soundex(text: str) -> str:
    """Classic American Soundex: letter + three digits, zero padded."""
    letters = _ascii_letters(text).replace(" ", "")
    if not letters:
        return ""
    out = [letters[0].upper()]
    prev = _SOUNDEX_CODES.get(letters[0], "")
    for ch in letters[1:]:
        code = _SOUNDEX_CODES.get(ch, "")
        if code and code != prev:
            out.append(code)
            if len(out) == 4:
                break
        # h and w do not separate letters with equal codes; vowels do
        if ch not in "hw":
            prev = code
    return "".join(out).ljust(4, "0")


_INDIC_RULES = [
    (re.compile(r"oo"), "u"),
    (re.compile(r"ee"), "i"),
    (re.compile(r"([bdtkgjp])h"), r"\1"),
    (re.compile(r"sh"), "s"),
    (re.compile(r"w"), "v"),
    (re.compile(r"v"), "b"),
]
_VOWELS = re.compile(r"[aeiou]")
_RUNS = re.compile(r"(.)\1+")


def _indic_token(tok: str) -> str:
    for pattern, repl in _INDIC_RULES:
        tok = pattern.sub(repl, tok)
    if not tok:
        return tok
    tok = tok[0] + _VOWELS.sub("", tok[1:])
    return _RUNS.sub(r"\1", tok)


def indic_lite(text: str) -> str:
    """Coarse per-token key for Indian names romanized inconsistently.

    Merges v/b (and w), s/sh, u/oo, i/ee, folds aspirated stops (bh, dh, th,
    kh, gh, jh, ph), drops non-initial vowels and collapses repeats. Keys are
    deliberately lossy: "vipin" and "bipin" collide.
    """
    return " ".join(_indic_token(t) for t in _ascii_letters(text).split())


def phonetic_key(name, scheme: PhoneticScheme | str = PhoneticScheme.INDIC_LITE) -> PhoneticKey:
    scheme = PhoneticScheme(scheme)
    name = name if isinstance(name, NormalizedName) else normalize(name)
    if name.text and name.script is not Script.LATIN:
        raise UnsupportedScript(f"phonetic keys need latin script, got {name.script.value}")
    if scheme is PhoneticScheme.SOUNDEX:
        return PhoneticKey(scheme, soundex(name.text))
    return PhoneticKey(scheme, indic_lite(name.text))


# ---------------------------------------------------------------------------
# Baseline
# ---------------------------------------------------------------------------


def baseline_match(name1, name2, threshold: float = 0.8) -> bool:
    """Levenshtein baseline on normalized strings; inclusive threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    a, b = normalize(_text(name1)).text, normalize(_text(name2)).text
    return levenshtein_similarity(a, b) >= threshold


# ---------------------------------------------------------------------------
# Structure-aware scorer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatcherConstants:
    # credit for a one-letter component against a component with that initial
    initial_credit: float = 0.9
    # component similarity floor when indic_lite keys agree
    phonetic_weight: float = 0.85
    # multiplier when the two components start with different letters
    initial_mismatch_factor: float = 0.6
    # multiplier when indic_lite keys differ
    key_mismatch_factor: float = 0.9

    def as_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT_CONSTANTS = MatcherConstants()

_VOWEL_SET = frozenset("aeiou")


def component_similarity(a: str, b: str, constants: MatcherConstants = DEFAULT_CONSTANTS) -> float:
    """Similarity of two single name components in [0, 1]."""
    if a == b:
        return 1.0
    if len(a) == 1 or len(b) == 1:
        if a[0] == b[0]:
            return constants.initial_credit
        return 0.0
    keys_equal = _indic_token(a) == _indic_token(b)
    sim = jaro_winkler(a, b)
    if keys_equal:
        sim = max(sim, constants.phonetic_weight)
    else:
        sim *= constants.key_mismatch_factor
    if a[0] != b[0] and not (a[0] in _VOWEL_SET and b[0] in _VOWEL_SET):
        sim *= constants.initial_mismatch_factor
    return sim


def _alignment_score(left: tuple[str, ...], right: tuple[str, ...], constants) -> float:
    if len(left) > len(right):
        left, right = right, left
    sims = [[component_similarity(x, y, constants) for y in right] for x in left]
    best = 0.0
    for cols in itertools.permutations(range(len(right)), len(left)):
        matched = [sims[i][j] for i, j in enumerate(cols)]
        leftover = set(range(len(right))) - set(cols)
        # unmatched initials ("shubham k singh" vs "shubham singh") are free
        unmatched = sum(1 for j in leftover if len(right[j]) > 1)
        score = math.fsum(matched) / (len(matched) + unmatched)
        if score > best:
            best = score
    return best


def structure_aware_score(
    name1,
    name2,
    lexicon: Optional[NameLexicon] = None,
    constants: MatcherConstants = DEFAULT_CONSTANTS,
) -> float:
    """Symmetric, alignment-based similarity of two full names.

    Both names go through patronymic resolution, honorific stripping and the
    structural parser; components are then aligned one-to-one to maximize the
    mean component similarity, scaled down by unmatched components.
    """
    lexicon = lexicon or default_lexicon()
    a = analyze(_text(name1), lexicon)
    b = analyze(_text(name2), lexicon)
    return _score_components(a.components, b.components, lexicon, constants)


@lru_cache(maxsize=200_000)
def _score_components(left, right, lexicon, constants) -> float:
    if left == right:
        return 1.0
    # canonical argument order keeps the float summation, hence the score, symmetric
    if (len(left), left) > (len(right), right):
        left, right = right, left
    return _alignment_score(left, right, constants)


def require_nonempty(*names) -> list[NormalizedName]:
    out = []
    for n in names:
        norm = n if isinstance(n, NormalizedName) else normalize(n)
        if not norm.text:
            raise EmptyName("name is empty after normalization")
        out.append(norm)
    return out

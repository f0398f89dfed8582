"""Name-level train/test leakage guard."""

from __future__ import annotations

from typing import Optional

from ..errors import EmptyName
from ..normalizer import normalize
from ..parser import NameLexicon, analyze, default_lexicon
from .corpus import Corpus

__all__ = ["name_keys", "enforce_disjointness"]


def name_keys(raw: str, lexicon: NameLexicon) -> set[tuple]:
    """Identity keys of a name: normalized text, component multiset, spaceless letters.

    The last key catches merged variants whose pieces are not all in the
    lexicon ("kirthansingh" vs "singh kirthan").
    """
    text = normalize(raw).text
    keys: set[tuple] = {("text", text)}
    if not text:
        return keys
    try:
        info = analyze(text, lexicon)
    except EmptyName:
        return keys
    keys.add(("components", info.component_multiset()))
    keys.add(("letters", "".join(sorted("".join(info.components)))))
    return keys


def enforce_disjointness(
    train: Corpus, test: Corpus, lexicon: Optional[NameLexicon] = None
) -> tuple[Corpus, int]:
    """Drop every training pair sharing a name identity with any test name."""
    lexicon = lexicon or default_lexicon()
    banned: set[tuple] = set()
    for pair in test:
        banned |= name_keys(pair.name1, lexicon)
        banned |= name_keys(pair.name2, lexicon)
    kept = [
        p for p in train
        if banned.isdisjoint(name_keys(p.name1, lexicon)) and banned.isdisjoint(name_keys(p.name2, lexicon))
    ]
    return Corpus(kept, train.split, train.seed), len(train) - len(kept)

"""Synthetic labeled-pair generator keyed to name-matching challenge categories.

Match categories apply a label-preserving distortion to one rendering of a
person; non-match categories pair two different people, including hard
negatives (initial-consonant neighbours, patronymic relatives).
"""

from __future__ import annotations

import bisect
import itertools
import random
import re
from dataclasses import dataclass
from typing import Mapping, Optional

from ..errors import LexiconTooSmall
from ..normalizer import default_inventory, HonorificMode
from ..parser import NameLexicon, default_lexicon
from .corpus import Corpus, Label, LabeledPair, Provenance, Split

__all__ = ["CATEGORIES", "DEFAULT_MIX", "synth_corpus", "transliterate", "Person"]

# category -> label
CATEGORIES: dict[str, Label] = {
    "inverted_merged": Label.MATCH,
    "spelling": Label.MATCH,
    "truncation": Label.MATCH,
    "honorific": Label.MATCH,
    "phonetic": Label.NON_MATCH,
    "patronymic": Label.NON_MATCH,
    "distinct": Label.NON_MATCH,
}

DEFAULT_MIX: dict[str, float] = {
    "inverted_merged": 0.15,
    "spelling": 0.15,
    "truncation": 0.10,
    "honorific": 0.10,
    "phonetic": 0.15,
    "patronymic": 0.10,
    "distinct": 0.25,
}

MIDDLE_NAME_RATE = 0.35
MAX_ATTEMPTS_PER_PAIR = 50

# romanization variants that keep the indic_lite key unchanged
_TRANSLIT = [
    (re.compile(r"sh"), "s"),
    (re.compile(r"s(?!h)"), "sh"),
    (re.compile(r"oo"), "u"),
    (re.compile(r"(?<!o)u(?!u)"), "oo"),
    (re.compile(r"ee"), "i"),
    (re.compile(r"(?<!e)i(?!i)"), "ee"),
    (re.compile(r"aa"), "a"),
    (re.compile(r"(?<=[^a])a(?=[^a])"), "aa"),
    (re.compile(r"([bdtkg])h"), r"\1"),
    (re.compile(r"([bdtkg])(?![h])"), r"\1h"),
]

_INITIAL_NEIGHBOURS = {"v": "b", "b": "v"}
_MARKERS = ("so", "s/o", "d/o", "w/o")


@dataclass(frozen=True)
class Person:
    first: str
    middle: str
    last: str

    @property
    def components(self) -> list[str]:
        return [c for c in (self.first, self.middle, self.last) if c]

    @property
    def text(self) -> str:
        return " ".join(self.components)


class _Weighted:
    def __init__(self, table: Mapping[str, float]):
        self.items = sorted(table)
        self.cum = list(itertools.accumulate(table[k] for k in self.items))

    def draw(self, rng: random.Random) -> str:
        x = rng.random() * self.cum[-1]
        return self.items[bisect.bisect_right(self.cum, x)]


def transliterate(token: str, rng: random.Random) -> Optional[str]:
    """One random romanization variant of ``token`` or None if no rule applies."""
    options = []
    for pattern, repl in _TRANSLIT:
        for m in pattern.finditer(token):
            variant = token[: m.start()] + m.expand(repl) + token[m.end():]
            if variant != token:
                options.append(variant)
    if not options:
        return None
    return rng.choice(sorted(set(options)))


class _Generator:
    def __init__(self, lexicon: NameLexicon, rng: random.Random):
        self.lexicon = lexicon
        self.rng = rng
        self.firsts = _Weighted(lexicon.first_names)
        self.surnames = _Weighted(lexicon.surnames)
        self.middles = _Weighted(lexicon.middle_markers) if lexicon.middle_markers else None
        self.vb_firsts = sorted(
            n for n in lexicon.first_names if n[0] in _INITIAL_NEIGHBOURS and n[1:2] != "h"
        )
        inv = default_inventory()
        self.prefixes = sorted(inv.of_mode(HonorificMode.PREFIX_TOKEN))
        self.fused = sorted(inv.of_mode(HonorificMode.FUSED_SUFFIX))

    def person(self, middle_rate: float = MIDDLE_NAME_RATE) -> Person:
        rng = self.rng
        first = self.firsts.draw(rng)
        middle = ""
        if self.middles is not None and rng.random() < middle_rate:
            middle = self.middles.draw(rng)
        last = self.surnames.draw(rng)
        while last == first or last == middle:
            last = self.surnames.draw(rng)
        return Person(first, middle, last)

    # -- match distortions -------------------------------------------------

    def inverted_merged(self, p: Person) -> str:
        rng = self.rng
        comps = p.components
        mode = rng.choice(("reorder", "merge", "reorder_merge"))
        if mode != "merge":
            perms = [list(x) for x in itertools.permutations(comps) if list(x) != comps]
            comps = rng.choice(perms)
        if mode == "reorder":
            return " ".join(comps)
        return "".join(comps)

    def spelling(self, p: Person) -> Optional[str]:
        comps = p.components
        order = list(range(len(comps)))
        self.rng.shuffle(order)
        for i in order:
            variant = transliterate(comps[i], self.rng)
            if variant:
                comps = comps[:i] + [variant] + comps[i + 1:]
                return " ".join(comps)
        return None

    def truncation(self, p: Person) -> str:
        """Shorten the middle or last name to its initial, keeping the component count."""
        rng = self.rng
        if p.middle:
            if rng.random() < 0.5:
                return f"{p.first} {p.middle[0]} {p.last}"
            return f"{p.first} {p.middle} {p.last[0]}"
        fused = f"{p.first}{p.last[0]}"
        if rng.random() < 0.5 and fused[-1] != "h" and not fused.endswith(tuple(self.fused)):
            return fused
        return f"{p.first} {p.last[0]}"

    def honorific(self, p: Person) -> str:
        rng = self.rng
        if rng.random() < 0.5:
            return f"{rng.choice(self.prefixes)} {p.text}"
        comps = p.components
        comps[0] = comps[0] + rng.choice(self.fused)
        return " ".join(comps)

    # -- non-match pairs ---------------------------------------------------

    def phonetic(self) -> tuple[str, str]:
        rng = self.rng
        first = rng.choice(self.vb_firsts)
        neighbour = _INITIAL_NEIGHBOURS[first[0]] + first[1:]
        p = self.person()
        return (
            Person(first, p.middle, p.last).text,
            Person(neighbour, p.middle, p.last).text,
        )

    def patronymic(self) -> tuple[str, str]:
        rng = self.rng
        child, parent = self.person(middle_rate=0.0), self.person(middle_rate=0.0)
        while parent.first == child.first:
            parent = self.person(middle_rate=0.0)
        marker = rng.choice(_MARKERS)
        left = f"{child.first} {marker} {parent.first}"
        right = parent.first if rng.random() < 0.5 else f"{parent.first} {child.last}"
        return left, right

    def distinct(self) -> tuple[str, str]:
        a, b = self.person(), self.person()
        while a.first == b.first and a.last == b.last:
            b = self.person()
        return a.text, b.text

    def pair(self, category: str) -> Optional[tuple[str, str]]:
        if CATEGORIES[category] is Label.NON_MATCH:
            a, b = getattr(self, category)()
        else:
            p = self.person()
            b = getattr(self, category)(p)
            if b is None:
                return None
            a = p.text
        if a == b:
            return None
        return (a, b) if self.rng.random() < 0.5 else (b, a)


def _check_mix(mix: Mapping[str, float]) -> dict[str, float]:
    unknown = set(mix) - set(CATEGORIES)
    if unknown:
        raise ValueError(f"unknown categories: {sorted(unknown)}")
    if any(w < 0 for w in mix.values()) or abs(sum(mix.values()) - 1.0) > 1e-9:
        raise ValueError("mix weights must be non-negative and sum to 1")
    return {k: mix[k] for k in CATEGORIES if mix.get(k, 0) > 0}


def synth_corpus(
    n: int,
    seed: int = 0,
    lexicon: Optional[NameLexicon] = None,
    mix: Mapping[str, float] = DEFAULT_MIX,
    split: Split | str = Split.TRAIN,
) -> Corpus:
    """Generate ``n`` distinct labeled pairs, each tagged with its category."""
    if n <= 0:
        raise ValueError("n must be positive")
    lexicon = lexicon or default_lexicon()
    if len(lexicon.first_names) < 2 or not lexicon.surnames:
        raise LexiconTooSmall("need at least two given names and one surname")
    mix = _check_mix(mix)
    if "phonetic" in mix and not any(n_[0] in _INITIAL_NEIGHBOURS for n_ in lexicon.first_names):
        raise LexiconTooSmall("phonetic negatives need given names starting with v or b")
    rng = random.Random(seed)
    gen = _Generator(lexicon, rng)
    cats, weights = list(mix), list(mix.values())

    seen: set = set()
    pairs: list[LabeledPair] = []
    failures = 0
    while len(pairs) < n:
        category = rng.choices(cats, weights)[0]
        names = gen.pair(category)
        pair = None
        if names is not None:
            pair = LabeledPair(names[0], names[1], CATEGORIES[category], Provenance.SYNTHETIC,
                               frozenset({category}))
        if pair is None or pair.key in seen:
            failures += 1
            if failures > MAX_ATTEMPTS_PER_PAIR * n:
                raise LexiconTooSmall(f"could only build {len(pairs)} distinct pairs of {n}")
            continue
        seen.add(pair.key)
        pairs.append(pair)
    return Corpus(pairs, split, seed)

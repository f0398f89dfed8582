"""Labeled name pairs, corpora and their line-delimited file format."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional

from ..normalizer import normalize

__all__ = ["Label", "Provenance", "Split", "LabeledPair", "Corpus", "read_corpus", "write_corpus"]


class Label(str, enum.Enum):
    MATCH = "match"
    NON_MATCH = "non_match"

    @property
    def answer(self) -> str:
        return "Yes" if self is Label.MATCH else "No"


class Provenance(str, enum.Enum):
    SEED = "seed"
    SWAP = "swap"
    PERMUTE = "permute"
    SPACE_REMOVAL = "space_removal"
    SYNTHETIC = "synthetic"


class Split(str, enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class LabeledPair:
    name1: str
    name2: str
    label: Label
    provenance: Provenance = Provenance.SEED
    tags: frozenset[str] = field(default_factory=frozenset)

    @property
    def key(self) -> tuple[str, str, str]:
        return (normalize(self.name1).text, normalize(self.name2).text, self.label.value)

    def swapped(self) -> "LabeledPair":
        return replace(self, name1=self.name2, name2=self.name1, provenance=Provenance.SWAP)

    def to_record(self) -> dict:
        return {
            "name1": self.name1,
            "name2": self.name2,
            "label": self.label.value,
            "provenance": self.provenance.value,
            "tags": sorted(self.tags),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "LabeledPair":
        return cls(
            rec["name1"],
            rec["name2"],
            Label(rec["label"]),
            Provenance(rec.get("provenance", "seed")),
            frozenset(rec.get("tags", ())),
        )


class Corpus:
    """Ordered, duplicate-free list of labeled pairs.

    Duplicates are judged on normalized names plus label; ``Corpus.build``
    silently drops them (first occurrence wins) while the plain constructor
    rejects them.
    """

    def __init__(self, pairs: Iterable[LabeledPair] = (), split: Split | str = Split.TRAIN, seed: int = 0):
        self.pairs: list[LabeledPair] = list(pairs)
        self.split = Split(split)
        self.seed = seed
        keys = [p.key for p in self.pairs]
        if len(set(keys)) != len(keys):
            raise ValueError("corpus contains duplicate (name1, name2, label) triples")
        self._keys = set(keys)

    @classmethod
    def build(cls, pairs: Iterable[LabeledPair], split: Split | str = Split.TRAIN, seed: int = 0) -> "Corpus":
        seen: set = set()
        kept = []
        for p in pairs:
            k = p.key
            if k not in seen:
                seen.add(k)
                kept.append(p)
        return cls(kept, split, seed)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[LabeledPair]:
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def __contains__(self, pair: LabeledPair) -> bool:
        return pair.key in self._keys

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self.pairs == other.pairs and self.split == other.split

    def __repr__(self) -> str:
        return f"Corpus({len(self.pairs)} pairs, split={self.split.value}, seed={self.seed})"

    def with_pairs(self, pairs: Iterable[LabeledPair]) -> "Corpus":
        return Corpus.build(pairs, self.split, self.seed)

    @property
    def labels(self) -> list[Label]:
        return [p.label for p in self.pairs]

    def names(self) -> set[str]:
        return {normalize(n).text for p in self.pairs for n in (p.name1, p.name2)}


def write_corpus(corpus: Corpus | Iterable[LabeledPair], sink: IO[str] | str | Path) -> int:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as fh:
            return write_corpus(corpus, fh)
    n = 0
    for pair in corpus:
        sink.write(json.dumps(pair.to_record(), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_corpus(source: IO[str] | str | Path, split: Split | str = Split.TRAIN, seed: int = 0,
                dedupe: bool = False) -> Corpus:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_corpus(fh, split, seed, dedupe)
    pairs = [LabeledPair.from_record(json.loads(line)) for line in source if line.strip()]
    return Corpus.build(pairs, split, seed) if dedupe else Corpus(pairs, split, seed)


def label_of(value: Optional[str | bool | Label]) -> Label:
    if isinstance(value, Label):
        return value
    if isinstance(value, bool):
        return Label.MATCH if value else Label.NON_MATCH
    return Label(value)

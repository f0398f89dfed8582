"""Lexicon-backed structural name parser (name -> first/middle/last)."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from .errors import EmptyName
from .normalizer import (
    HonorificInventory,
    NormalizedName,
    PatronymicInfo,
    detect_patronymic,
    normalize,
    strip_honorifics,
)

__all__ = [
    "ParsedName",
    "NameLexicon",
    "NameAnalysis",
    "parse",
    "segment_merged",
    "to_schema_text",
    "from_schema_text",
    "analyze",
    "default_lexicon",
]

LEXICON_CLASSES = ("first", "surname", "middle_marker")


@dataclass(frozen=True)
class ParsedName:
    first: str
    middle: str = ""
    last: str = ""

    def __post_init__(self):
        if not self.first:
            raise ValueError("ParsedName.first must be non-empty")

    @property
    def components(self) -> tuple[str, ...]:
        return tuple(c for c in (self.first, self.middle, self.last) if c)

    def joined(self) -> str:
        return " ".join(self.components)


@dataclass(frozen=True, eq=False)
class NameLexicon:
    """Known given names, surnames and middle markers with frequency weights.

    Identity-hashed so parse results can be memoized per lexicon instance.
    """

    first_names: Mapping[str, float]
    surnames: Mapping[str, float]
    middle_markers: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for table in (self.first_names, self.surnames, self.middle_markers):
            for name in table:
                if normalize(name).text != name or " " in name:
                    raise ValueError(f"lexicon entry {name!r} is not a normalized single token")

    @property
    def members(self) -> set[str]:
        return set(self.first_names) | set(self.surnames) | set(self.middle_markers)

    def __contains__(self, token: str) -> bool:
        return token in self.first_names or token in self.surnames or token in self.middle_markers

    def weight(self, token: str) -> float:
        return max(
            self.first_names.get(token, 0.0),
            self.surnames.get(token, 0.0),
            self.middle_markers.get(token, 0.0),
        )

    def is_first_only(self, token: str) -> bool:
        return token in self.first_names and token not in self.surnames

    def is_surname_only(self, token: str) -> bool:
        return token in self.surnames and token not in self.first_names

    @classmethod
    def parse(cls, text: str) -> "NameLexicon":
        tables: dict[str, dict[str, float]] = {c: {} for c in LEXICON_CLASSES}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 'name<TAB>class<TAB>weight'")
            name, cls_, weight = parts[0].strip(), parts[1].strip(), float(parts[2])
            if cls_ not in tables:
                raise ValueError(f"line {lineno}: unknown class {cls_!r}")
            if name in tables[cls_]:
                raise ValueError(f"line {lineno}: duplicate entry ({name!r}, {cls_})")
            if weight <= 0:
                raise ValueError(f"line {lineno}: weight must be positive")
            tables[cls_][name] = weight
        return cls(tables["first"], tables["surname"], tables["middle_marker"])

    @classmethod
    def load(cls, path: str | Path) -> "NameLexicon":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


_DEFAULT_LEXICON: Optional[NameLexicon] = None


def default_lexicon() -> NameLexicon:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        text = resources.files("namelink.data").joinpath("lexicon.tsv").read_text("utf-8")
        _DEFAULT_LEXICON = NameLexicon.parse(text)
    return _DEFAULT_LEXICON


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------


def _split_key(parts: tuple[str, ...], lexicon: NameLexicon):
    # a split is only as plausible as its rarest part
    coverage = min(lexicon.weight(p) for p in parts)
    return (-coverage, len(parts), -len(parts[0]), parts)


def segment_merged(token: str, lexicon: NameLexicon) -> list[tuple[str, ...]]:
    """All 2- and 3-way splits of ``token`` whose parts are all lexicon members.

    Ranked by weight coverage, then fewer parts, then longest first part.
    """
    if " " in token:
        raise ValueError("segment_merged expects a single token")
    n = len(token)
    found: list[tuple[str, ...]] = []
    for i in range(1, n):
        head = token[:i]
        if head not in lexicon:
            continue
        tail = token[i:]
        if tail in lexicon:
            found.append((head, tail))
        for j in range(i + 1, n):
            mid, last = token[i:j], token[j:]
            if mid in lexicon and last in lexicon:
                found.append((head, mid, last))
    found.sort(key=lambda parts: _split_key(parts, lexicon))
    return found


def _expand(token: str, lexicon: NameLexicon) -> tuple[str, ...]:
    if token in lexicon:
        return (token,)
    splits = segment_merged(token, lexicon)
    if splits:
        return splits[0]
    # trailing initial glued to a known name: "rajeshk" -> ("rajesh", "k");
    # a trailing "h" is far more often aspiration ("abhishekh") than an initial
    if len(token) > 2 and token[:-1] in lexicon and token[-1].isalpha() and token[-1] != "h":
        return (token[:-1], token[-1])
    return (token,)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse(name: NormalizedName, lexicon: Optional[NameLexicon] = None) -> ParsedName:
    """Assign components to first/middle/last slots.

    Merged tokens are expanded through :func:`segment_merged` first. A
    leading surname-only piece followed by a given-name-only piece is moved to
    the last slot ("singh kirtan" -> first=kirtan, last=singh). Four or more
    pieces put everything between the first and last into the middle slot.
    """
    lexicon = lexicon or default_lexicon()
    if not name.text:
        raise EmptyName("cannot parse an empty name")
    return _parse_text(name.text, lexicon)


@lru_cache(maxsize=200_000)
def _parse_text(text: str, lexicon: NameLexicon) -> ParsedName:
    pieces: list[str] = []
    for tok in text.split(" "):
        pieces.extend(_expand(tok, lexicon))

    if len(pieces) == 1:
        return ParsedName(pieces[0])
    inverted = lexicon.is_surname_only(pieces[0]) and lexicon.is_first_only(pieces[1])
    if len(pieces) == 2:
        if inverted:
            return ParsedName(pieces[1], "", pieces[0])
        return ParsedName(pieces[0], "", pieces[1])
    if len(pieces) == 3 and inverted:
        return ParsedName(pieces[1], pieces[2], pieces[0])
    return ParsedName(pieces[0], " ".join(pieces[1:-1]), pieces[-1])


def to_schema_text(p: ParsedName) -> str:
    """Byte-stable JSON with keys first_name, middle_name, last_name."""
    return json.dumps(
        {"first_name": p.first, "middle_name": p.middle, "last_name": p.last},
        ensure_ascii=False,
    )


def from_schema_text(text: str) -> ParsedName:
    obj = json.loads(text)
    return ParsedName(obj["first_name"], obj.get("middle_name", ""), obj.get("last_name", ""))


# ---------------------------------------------------------------------------
# Full analysis: normalize -> patronymic -> honorifics -> parse
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NameAnalysis:
    normalized: NormalizedName
    patronymic: PatronymicInfo
    honorifics: tuple[str, ...]
    parsed: ParsedName

    @property
    def components(self) -> tuple[str, ...]:
        return self.parsed.components

    def component_multiset(self) -> tuple[str, ...]:
        return tuple(sorted(self.components))

    def annotations(self) -> dict:
        pat = self.patronymic
        return {
            "honorifics": list(self.honorifics),
            "relation": pat.relation.value,
            "relative": pat.relative.text if pat.relative is not None else None,
        }


def analyze(
    raw: str | NormalizedName,
    lexicon: Optional[NameLexicon] = None,
    inventory: Optional[HonorificInventory] = None,
) -> NameAnalysis:
    """Resolve patronymic, strip honorifics and parse what remains.

    Only the patronymic subject is parsed; the relative never leaks into the
    components.
    """
    lexicon = lexicon or default_lexicon()
    name = raw if isinstance(raw, NormalizedName) else normalize(raw)
    if not name.text:
        raise EmptyName("name is empty after normalization")
    if inventory is None:
        return _analyze_default(name.text, lexicon)
    return _analyze(name, lexicon, inventory)


def _analyze(name: NormalizedName, lexicon: NameLexicon, inventory) -> NameAnalysis:
    pat = detect_patronymic(name)
    stripped = strip_honorifics(pat.subject, inventory, protected=_protected(lexicon))
    parsed = _parse_text(stripped.name.text, lexicon)
    return NameAnalysis(name, pat, tuple(stripped.tags), parsed)


@lru_cache(maxsize=200_000)
def _analyze_default(text: str, lexicon: NameLexicon) -> NameAnalysis:
    return _analyze(normalize(text), lexicon, None)


@lru_cache(maxsize=16)
def _protected(lexicon: NameLexicon) -> frozenset[str]:
    return frozenset(lexicon.members)


def character_multiset(text: str) -> Counter:
    return Counter(text.replace(" ", ""))

"""Name canonicalization and surface-feature extraction.

Everything here is a pure function of its inputs. ``normalize`` is lossless
apart from casing, whitespace and Unicode composition: diacritics survive so
that the train/test disjointness guard never conflates distinct spellings.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

__all__ = [
    "Script",
    "NormalizedName",
    "Relation",
    "PatronymicInfo",
    "HonorificMode",
    "Honorific",
    "HonorificInventory",
    "StripResult",
    "normalize",
    "detect_script",
    "strip_honorifics",
    "detect_patronymic",
    "default_inventory",
]


class Script(str, enum.Enum):
    LATIN = "latin"
    DEVANAGARI = "devanagari"
    OTHER = "other"
    MIXED = "mixed"


@dataclass(frozen=True)
class NormalizedName:
    text: str
    script: Script = Script.LATIN

    def __str__(self) -> str:
        return self.text

    @property
    def tokens(self) -> list[str]:
        return self.text.split(" ") if self.text else []

    def __bool__(self) -> bool:
        return bool(self.text)


def detect_script(text: str) -> Script:
    """Classify by the scripts of the letters in ``text``.

    Latin letters with diacritics count as latin. Strings without any letter
    are reported as ``other``.
    """
    seen: set[Script] = set()
    for ch in text:
        if not ch.isalpha():
            continue
        name = unicodedata.name(ch, "")
        if name.startswith("LATIN"):
            seen.add(Script.LATIN)
        elif name.startswith("DEVANAGARI"):
            seen.add(Script.DEVANAGARI)
        else:
            seen.add(Script.OTHER)
    if not seen:
        return Script.OTHER
    if len(seen) > 1:
        return Script.MIXED
    return seen.pop()


def normalize(raw: str) -> NormalizedName:
    """Lowercase, NFC-compose and collapse whitespace.

    >>> normalize("  Kirtan  Singh Rathore ").text
    'kirtan singh rathore'
    """
    text = unicodedata.normalize("NFC", raw)
    text = unicodedata.normalize("NFC", text.lower())
    text = " ".join(text.split())
    return NormalizedName(text, detect_script(text))


# ---------------------------------------------------------------------------
# Honorifics
# ---------------------------------------------------------------------------


class HonorificMode(str, enum.Enum):
    PREFIX_TOKEN = "prefix-token"
    SUFFIX_TOKEN = "suffix-token"
    FUSED_SUFFIX = "fused-suffix"


@dataclass(frozen=True)
class Honorific:
    surface: str
    mode: HonorificMode


# fused suffixes only come off tokens that keep at least this many characters
MIN_STEM = 3


@dataclass(frozen=True)
class HonorificInventory:
    entries: tuple[Honorific, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("honorific inventory is empty")

    @classmethod
    def parse(cls, text: str) -> "HonorificInventory":
        entries = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'surface<TAB>mode', got {line!r}")
            surface = normalize(parts[0]).text
            entries.append(Honorific(surface, HonorificMode(parts[1].strip())))
        return cls(tuple(entries))

    @classmethod
    def load(cls, path: str | Path) -> "HonorificInventory":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def of_mode(self, mode: HonorificMode) -> list[str]:
        return [h.surface for h in self.entries if h.mode is mode]


_DEFAULT_INVENTORY: Optional[HonorificInventory] = None


def default_inventory() -> HonorificInventory:
    global _DEFAULT_INVENTORY
    if _DEFAULT_INVENTORY is None:
        text = resources.files("namelink.data").joinpath("honorifics.tsv").read_text("utf-8")
        _DEFAULT_INVENTORY = HonorificInventory.parse(text)
    return _DEFAULT_INVENTORY


@dataclass(frozen=True)
class StripResult:
    name: NormalizedName
    removed: tuple[tuple[str, str], ...] = ()
    # set when stripping would have emptied the name and the input was kept
    advisory: bool = False

    @property
    def tags(self) -> list[str]:
        return [surface for surface, _ in self.removed]

    def __iter__(self):
        # allows ``name, removed = strip_honorifics(...)``
        yield self.name
        yield self.tags


def strip_honorifics(
    name: NormalizedName,
    inventory: Optional[HonorificInventory] = None,
    protected: Iterable[str] = (),
) -> StripResult:
    """Remove honorific prefixes, suffix tokens and fused suffixes.

    ``removed`` records ``(surface, position)`` where position is ``prefix``,
    ``suffix`` or ``fused``. Tokens listed in ``protected`` (usually the
    lexicon's names, e.g. "balaji") are never cut.
    """
    inventory = inventory or default_inventory()
    protected = protected if isinstance(protected, (set, frozenset)) else set(protected)
    prefixes = set(inventory.of_mode(HonorificMode.PREFIX_TOKEN))
    suffixes = set(inventory.of_mode(HonorificMode.SUFFIX_TOKEN))
    # longest first so "shrimati"-style overlaps resolve deterministically
    fused = sorted(inventory.of_mode(HonorificMode.FUSED_SUFFIX), key=lambda s: (-len(s), s))

    tokens = name.tokens
    removed: list[tuple[str, str]] = []
    while tokens and tokens[0] in prefixes and tokens[0] not in protected:
        removed.append((tokens.pop(0), "prefix"))
    trailing: list[tuple[str, str]] = []
    while tokens and tokens[-1] in suffixes and tokens[-1] not in protected:
        trailing.append((tokens.pop(), "suffix"))

    out = []
    for tok in tokens:
        if tok not in protected:
            for suf in fused:
                if tok.endswith(suf) and len(tok) - len(suf) >= MIN_STEM:
                    removed.append((suf, "fused"))
                    tok = tok[: -len(suf)]
                    break
        out.append(tok)
    removed.extend(reversed(trailing))

    if not out:
        return StripResult(name, (), advisory=True)
    text = " ".join(out)
    return StripResult(NormalizedName(text, detect_script(text)), tuple(removed))


# ---------------------------------------------------------------------------
# Patronymics
# ---------------------------------------------------------------------------


class Relation(str, enum.Enum):
    SON_OF = "son_of"
    DAUGHTER_OF = "daughter_of"
    WIFE_OF = "wife_of"
    NONE = "none"


_SINGLE_MARKERS = {
    "so": Relation.SON_OF,
    "s/o": Relation.SON_OF,
    "d/o": Relation.DAUGHTER_OF,
    "w/o": Relation.WIFE_OF,
}
# the two-token spelling "s o" (slash lost in transcription)
_PAIR_MARKERS = {("s", "o"): Relation.SON_OF}


@dataclass(frozen=True)
class PatronymicInfo:
    subject: NormalizedName
    relation: Relation = Relation.NONE
    relative: Optional[NormalizedName] = field(default=None)


def _sub(tokens: list[str]) -> NormalizedName:
    text = " ".join(tokens)
    return NormalizedName(text, detect_script(text))


def detect_patronymic(name: NormalizedName) -> PatronymicInfo:
    """Split ``"rajesh so hari"`` into subject, relation and relative.

    Markers are only recognized strictly inside the name, with a non-empty
    segment on each side.
    """
    tokens = name.tokens
    for i in range(1, len(tokens) - 1):
        rel = _SINGLE_MARKERS.get(tokens[i])
        if rel is not None:
            return PatronymicInfo(_sub(tokens[:i]), rel, _sub(tokens[i + 1 :]))
        if i + 2 < len(tokens):
            rel = _PAIR_MARKERS.get((tokens[i], tokens[i + 1]))
            if rel is not None:
                return PatronymicInfo(_sub(tokens[:i]), rel, _sub(tokens[i + 2 :]))
    return PatronymicInfo(name)

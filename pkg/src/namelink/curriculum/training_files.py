"""Phase-1 (structure) and Phase-2 (matching) training-file emission."""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable

from ..errors import InconsistentAnnotation
from ..normalizer import NormalizedName
from ..parser import ParsedName, character_multiset, to_schema_text
from .corpus import Corpus
from .prompts import PromptTemplate

__all__ = ["build_phase1_file", "build_phase2_file", "phase2_records"]


def _open(sink, fn):
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            return fn(fh)
    return fn(sink)


def build_phase1_file(names: Iterable[tuple[NormalizedName, ParsedName]], sink: IO[str] | str | Path) -> int:
    """Write ``{"input", "target"}`` records; targets are schema text.

    Raises InconsistentAnnotation when a parse adds or drops characters.
    """
    records = []
    for i, (name, parsed) in enumerate(names):
        text = name.text if isinstance(name, NormalizedName) else name
        if character_multiset(text) != character_multiset(parsed.joined()):
            raise InconsistentAnnotation(f"record {i}: components of {parsed!r} do not cover {text!r}")
        records.append(json.dumps({"input": text, "target": to_schema_text(parsed)}, ensure_ascii=False))

    def write(fh):
        for line in records:
            fh.write(line + "\n")
        return len(records)

    return _open(sink, write)


def phase2_records(c: Corpus, t: PromptTemplate) -> list[dict]:
    t.validate()
    return [{"prompt": t.render(p.name1, p.name2), "answer": p.label.answer} for p in c]


def build_phase2_file(c: Corpus, t: PromptTemplate, sink: IO[str] | str | Path) -> int:
    records = phase2_records(c, t)

    def write(fh):
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        return len(records)

    return _open(sink, write)

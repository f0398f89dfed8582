"""Prompt template shared by training-file emission and gateway scoring."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from ..errors import TemplateInvalid
from ..normalizer import normalize

__all__ = ["PromptTemplate", "render_prompt", "default_template", "TARGET_FORMAT"]

TARGET_FORMAT = 'Name 1: "<A>" | Name 2: "<B>" -> Match?'


@dataclass(frozen=True)
class FewShot:
    name1: str
    name2: str
    answer: str


@dataclass(frozen=True)
class PromptTemplate:
    instruction: str
    fewshot: tuple[FewShot, ...] = ()
    target_format: str = TARGET_FORMAT
    version: str = "1"

    def validate(self) -> "PromptTemplate":
        fmt = self.target_format
        if fmt.count("<A>") != 1 or fmt.count("<B>") != 1:
            raise TemplateInvalid("target_format needs exactly one <A> and one <B> placeholder")
        if fmt.index("<A>") > fmt.index("<B>"):
            raise TemplateInvalid("<A> must precede <B> in target_format")
        for shot in self.fewshot:
            if shot.answer not in ("Yes", "No"):
                raise TemplateInvalid(f"few-shot answer must be Yes or No, got {shot.answer!r}")
        return self

    def target_line(self, a: str, b: str) -> str:
        return self.target_format.replace("<A>", a, 1).replace("<B>", b, 1)

    def render(self, name1: str, name2: str) -> str:
        a, b = normalize(name1).text, normalize(name2).text
        blocks = [self.instruction.strip()]
        if self.fewshot:
            blocks.append("\n".join(
                f"{self.target_line(normalize(s.name1).text, normalize(s.name2).text)} {s.answer}"
                for s in self.fewshot
            ))
        blocks.append(self.target_line(a, b))
        return "\n\n".join(blocks)

    def target_pattern(self) -> re.Pattern:
        """Regex recovering (A, B) from the final line of a rendered prompt."""
        head, rest = self.target_format.split("<A>", 1)
        mid, tail = rest.split("<B>", 1)
        return re.compile(
            r"(?:^|\n)" + re.escape(head) + r"(.*)" + re.escape(mid) + r"(.*)" + re.escape(tail) + r"\Z"
        )

    def extract_pair(self, prompt: str) -> tuple[str, str]:
        last = prompt.rsplit("\n", 1)[-1]
        m = self.target_pattern().search("\n" + last)
        if m is None:
            raise ValueError("prompt does not end with the template's target line")
        return m.group(1), m.group(2)

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": self.version,
                "instruction": self.instruction,
                "fewshot": [{"name1": s.name1, "name2": s.name2, "answer": s.answer} for s in self.fewshot],
                "target_format": self.target_format,
            },
            ensure_ascii=False,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "PromptTemplate":
        obj = json.loads(text)
        try:
            shots = tuple(FewShot(s["name1"], s["name2"], s["answer"]) for s in obj.get("fewshot", ()))
            tpl = cls(obj["instruction"], shots, obj.get("target_format", TARGET_FORMAT), str(obj.get("version", "1")))
        except (KeyError, TypeError) as exc:
            raise TemplateInvalid(f"malformed template file: {exc}") from exc
        return tpl.validate()

    @classmethod
    def load(cls, path: str | Path) -> "PromptTemplate":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


_DEFAULT: Optional[PromptTemplate] = None


def default_template() -> PromptTemplate:
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("namelink.data").joinpath("template.json").read_text("utf-8")
        _DEFAULT = PromptTemplate.from_json(text)
    return _DEFAULT


def render_prompt(template: PromptTemplate, name1: str, name2: str) -> str:
    return template.render(name1, name2)

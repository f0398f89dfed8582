"""End-to-end desk-scale runs and calibration artifacts."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .curriculum import AugmentRates, Corpus, Split, augment_all, enforce_disjointness, synth_corpus
from .curriculum.prompts import PromptTemplate, default_template
from .evaluator import MetricReport, calibrate_threshold, evaluate_baseline, evaluate_pipeline, score_corpus
from .gateway import Backend, MockBackend
from .parser import NameLexicon, default_lexicon

__all__ = [
    "Calibration",
    "calibrate_backend",
    "load_calibration",
    "default_calibration",
    "reference_calibration",
    "split_corpus",
    "DeskRun",
    "run_desk_pipeline",
    "DEFAULT_CALIBRATION_N",
    "DEFAULT_CALIBRATION_SEED",
    "clear_caches",
]

DEFAULT_CALIBRATION_N = 1000
DEFAULT_CALIBRATION_SEED = 2024


@dataclass(frozen=True)
class Calibration:
    threshold: float
    f1: float
    backend_id: str
    n: int
    seed: Optional[int]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def calibrate_backend(corpus: Corpus, backend: Backend, template: Optional[PromptTemplate] = None) -> Calibration:
    probs = score_corpus(corpus, backend, template)
    threshold, f1 = calibrate_threshold(probs, corpus.labels)
    return Calibration(threshold, f1, backend.backend_id, len(corpus), corpus.seed)


def load_calibration(path: str | Path) -> Calibration:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return Calibration(float(obj["threshold"]), float(obj["f1"]), obj["backend_id"], int(obj["n"]), obj.get("seed"))


def default_calibration() -> Calibration:
    """The shipped artifact: mock backend calibrated on a 1,000-pair synthetic validation set."""
    text = resources.files("namelink.data").joinpath("calibration.json").read_text("utf-8")
    obj = json.loads(text)
    return Calibration(float(obj["threshold"]), float(obj["f1"]), obj["backend_id"], int(obj["n"]), obj.get("seed"))


def reference_calibration(lexicon: Optional[NameLexicon] = None) -> Calibration:
    """Recompute the shipped calibration from scratch."""
    lexicon = lexicon or default_lexicon()
    val = synth_corpus(DEFAULT_CALIBRATION_N, seed=DEFAULT_CALIBRATION_SEED, lexicon=lexicon, split=Split.VALIDATION)
    return calibrate_backend(val, MockBackend(lexicon))


def clear_caches() -> None:
    """Drop memoized parses and scores so a run starts cold."""
    from . import matchers, parser

    parser._parse_text.cache_clear()
    parser._analyze_default.cache_clear()
    matchers._score_components.cache_clear()


def split_corpus(c: Corpus, seed: int, fractions=(0.7, 0.15, 0.15)) -> tuple[Corpus, Corpus, Corpus]:
    """Seeded shuffle into train / validation / test."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("split fractions must sum to 1")
    idx = list(range(len(c)))
    random.Random(seed).shuffle(idx)
    n_train = int(len(idx) * fractions[0])
    n_val = int(len(idx) * fractions[1])
    parts = (idx[:n_train], idx[n_train:n_train + n_val], idx[n_train + n_val:])
    return tuple(
        Corpus([c.pairs[i] for i in sorted(part)], split, c.seed)
        for part, split in zip(parts, (Split.TRAIN, Split.VALIDATION, Split.TEST))
    )


@dataclass
class DeskRun:
    train: Corpus
    validation: Corpus
    test: Corpus
    removed: int
    calibration: Calibration
    report: MetricReport
    baseline: MetricReport

    @property
    def reports(self) -> list[MetricReport]:
        return [self.baseline, self.report]


def run_desk_pipeline(
    n: int = 10_000,
    seed: int = 7,
    lexicon: Optional[NameLexicon] = None,
    template: Optional[PromptTemplate] = None,
    backend: Optional[Backend] = None,
    rates: AugmentRates = AugmentRates(),
) -> DeskRun:
    """synth -> augment -> split -> disjointness -> calibrate (validation) -> evaluate (test)."""
    lexicon = lexicon or default_lexicon()
    template = template or default_template()
    backend = backend or MockBackend(lexicon, template=template)

    corpus = augment_all(synth_corpus(n, seed=seed, lexicon=lexicon), lexicon, seed=seed, rates=rates)
    train, val, test = split_corpus(corpus, seed)
    train, removed_test = enforce_disjointness(train, test, lexicon)
    train, removed_val = enforce_disjointness(train, val, lexicon)

    calibration = calibrate_backend(val, backend, template)
    report = evaluate_pipeline(test, backend, template, calibration.threshold)
    baseline = evaluate_baseline(test)
    return DeskRun(train, val, test, removed_test + removed_val, calibration, report, baseline)

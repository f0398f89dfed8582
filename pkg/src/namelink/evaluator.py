"""Confusion counts, F1-maximizing threshold calibration and report tables."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence

from .curriculum.corpus import Corpus, Label, Split, label_of
from .curriculum.prompts import PromptTemplate, default_template
from .errors import EmptyInput, LengthMismatch, NameLinkError, NoPositives, SplitGuard
from .gateway import Backend, TokenScores, decide, match_probability
from .matchers import baseline_match

__all__ = [
    "ConfusionCounts",
    "MetricReport",
    "confusion",
    "metrics",
    "f1_score",
    "calibrate_threshold",
    "candidate_thresholds",
    "PairScoringError",
    "score_corpus",
    "corpus_token_scores",
    "evaluate_pipeline",
    "evaluate_baseline",
    "emit_report",
    "write_reports",
    "read_reports",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    counts: ConfusionCounts
    threshold: float = float("nan")
    backend_id: str = ""
    split: str = ""
    seed: Optional[int] = None

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["counts"] = asdict(self.counts)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "MetricReport":
        rec = dict(rec)
        rec["counts"] = ConfusionCounts(**rec["counts"])
        return cls(**rec)


def _is_positive(x) -> bool:
    if isinstance(x, (bool, int)):
        return bool(x)
    if isinstance(x, str) and x.lower() in ("yes", "no"):
        return x.lower() == "yes"
    return label_of(x) is Label.MATCH


def confusion(predictions: Sequence, labels: Sequence) -> ConfusionCounts:
    """Tally verdicts against labels; ``match``/``yes``/True is the positive class."""
    if len(predictions) != len(labels):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(labels)} labels")
    if not labels:
        raise EmptyInput("nothing to evaluate")
    tp = fp = tn = fn = 0
    for pred, gold in zip(predictions, labels):
        p, g = _is_positive(pred), _is_positive(gold)
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def metrics(c: ConfusionCounts) -> MetricReport:
    if c.total == 0:
        raise EmptyInput("confusion counts are all zero")
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    return MetricReport(
        accuracy=(c.tp + c.tn) / c.total,
        precision=precision,
        recall=recall,
        # 2tp / (2tp + fp + fn) equals the harmonic mean but rounds only once
        f1=2 * c.tp / (2 * c.tp + c.fp + c.fn) if c.tp else 0.0,
        counts=c,
    )


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------


def candidate_thresholds(scores: Iterable[float]) -> list[float]:
    """0, 1 and the midpoints between adjacent distinct scores, ascending."""
    distinct = sorted(set(scores))
    mids = [(lo + hi) / 2 for lo, hi in zip(distinct, distinct[1:])]
    return sorted(set([0.0, 1.0] + mids))


def calibrate_threshold(scores: Sequence[float], labels: Sequence) -> tuple[float, float]:
    """Threshold maximizing F1 of ``score >= threshold``; ties go to the smallest.

    F1 values are compared exactly as ``2tp / (2tp + fp + fn)`` rationals so
    the winner does not depend on floating-point rounding.
    """
    if len(scores) != len(labels):
        raise LengthMismatch(f"{len(scores)} scores vs {len(labels)} labels")
    if not scores:
        raise EmptyInput("nothing to calibrate on")
    gold = [_is_positive(g) for g in labels]
    positives = sum(gold)
    if positives == 0:
        raise NoPositives("calibration needs at least one positive label")

    order = sorted(range(len(scores)), key=lambda i: scores[i])
    # sweep thresholds upward; everything with score < t is predicted negative
    best_t, best_num, best_den = None, -1, 1
    tp, fp = positives, len(scores) - positives
    k = 0
    for t in candidate_thresholds(scores):
        while k < len(order) and scores[order[k]] < t:
            if gold[order[k]]:
                tp -= 1
            else:
                fp -= 1
            k += 1
        fn = positives - tp
        num, den = 2 * tp, 2 * tp + fp + fn
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
            best_counts = (tp, fp, fn)
    tp, fp, fn = best_counts
    tn = len(scores) - tp - fp - fn
    return best_t, metrics(ConfusionCounts(tp, fp, tn, fn)).f1


# ---------------------------------------------------------------------------
# Pipeline evaluation
# ---------------------------------------------------------------------------


class PairScoringError(NameLinkError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"pair {index}: {cause}")
        self.index = index
        self.code = getattr(cause, "code", self.code)


def corpus_token_scores(corpus: Corpus, backend: Backend, template: Optional[PromptTemplate] = None,
                        batch_size: int = 256) -> list[TokenScores]:
    """Raw Yes/No scores for every pair, in corpus order."""
    template = template or default_template()
    out: list[TokenScores] = []
    for start in range(0, len(corpus), batch_size):
        chunk = corpus.pairs[start:start + batch_size]
        prompts = [template.render(p.name1, p.name2) for p in chunk]
        try:
            out.extend(backend.score_prompts(prompts))
        except NameLinkError as exc:
            # pin the failure to the first pair of the failing batch
            raise PairScoringError(start, exc) from exc
    return out


def score_corpus(corpus: Corpus, backend: Backend, template: Optional[PromptTemplate] = None,
                 batch_size: int = 256) -> list[float]:
    """Match probabilities for every pair, in corpus order."""
    return [match_probability(s) for s in corpus_token_scores(corpus, backend, template, batch_size)]


def evaluate_pipeline(
    corpus: Corpus,
    backend: Backend,
    template: Optional[PromptTemplate] = None,
    threshold: float = 0.5,
) -> MetricReport:
    if corpus.split is Split.TRAIN:
        raise SplitGuard("refusing to evaluate on a training corpus")
    scores = corpus_token_scores(corpus, backend, template)
    verdicts = [decide(s, threshold, backend.backend_id).verdict for s in scores]
    report = metrics(confusion(verdicts, corpus.labels))
    return _stamp(report, threshold, backend.backend_id, corpus)


def evaluate_baseline(corpus: Corpus, threshold: float = 0.8) -> MetricReport:
    """Levenshtein baseline on the same corpus."""
    if corpus.split is Split.TRAIN:
        raise SplitGuard("refusing to evaluate on a training corpus")
    verdicts = [baseline_match(p.name1, p.name2, threshold) for p in corpus]
    report = metrics(confusion(verdicts, corpus.labels))
    return _stamp(report, threshold, "levenshtein", corpus)


def _stamp(report: MetricReport, threshold: float, backend_id: str, corpus: Corpus) -> MetricReport:
    return MetricReport(report.accuracy, report.precision, report.recall, report.f1, report.counts,
                        threshold, backend_id, corpus.split.value, corpus.seed)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

_COLUMNS = ("Model / Method", "Split", "Threshold", "Accuracy", "Precision", "Recall", "F1-Score")


def _row(r: MetricReport) -> tuple[str, ...]:
    return (
        r.backend_id or "-",
        r.split or "-",
        f"{r.threshold:.4f}",
        f"{100 * r.accuracy:.2f}%",
        f"{100 * r.precision:.2f}%",
        f"{100 * r.recall:.2f}%",
        f"{r.f1:.3f}",
    )


def emit_report(reports: Sequence[MetricReport], sink: Optional[IO[str]] = None) -> str:
    """Aligned text table, one row per report in the order given."""
    rows = [_COLUMNS] + [_row(r) for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(_COLUMNS))]

    def fmt(row):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        return " | ".join(cells).rstrip()

    lines = [fmt(rows[0]), "-+-".join("-" * w for w in widths)] + [fmt(r) for r in rows[1:]]
    table = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(table)
    return table


def write_reports(reports: Iterable[MetricReport], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in reports:
            fh.write(json.dumps(r.to_record(), sort_keys=True) + "\n")


def read_reports(path: str | Path) -> list[MetricReport]:
    with open(path, encoding="utf-8") as fh:
        return [MetricReport.from_record(json.loads(line)) for line in fh if line.strip()]

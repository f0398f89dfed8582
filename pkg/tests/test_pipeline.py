from __future__ import annotations

import pytest

from namelink.curriculum import Split, synth_corpus
from namelink.pipeline import (
    Calibration,
    default_calibration,
    load_calibration,
    reference_calibration,
    run_desk_pipeline,
    split_corpus,
)


def test_shipped_calibration_is_reproducible():
    shipped = default_calibration()
    assert reference_calibration() == shipped
    assert 0.0 < shipped.threshold < 1.0 and shipped.backend_id == "mock-structure-v1"


def test_calibration_file_round_trip(tmp_path):
    cal = Calibration(0.7, 0.95, "mock", 10, 3)
    cal.save(tmp_path / "c.json")
    assert load_calibration(tmp_path / "c.json") == cal


def test_split_corpus_partitions():
    c = synth_corpus(1000, seed=1)
    train, val, test = split_corpus(c, seed=2)
    assert (len(train), len(val), len(test)) == (700, 150, 150)
    assert (train.split, val.split, test.split) == (Split.TRAIN, Split.VALIDATION, Split.TEST)
    keys = [p.key for part in (train, val, test) for p in part]
    assert sorted(keys) == sorted(p.key for p in c)
    with pytest.raises(ValueError):
        split_corpus(c, 0, (0.5, 0.5, 0.5))


def test_small_desk_run():
    run = run_desk_pipeline(n=1000, seed=3)
    assert run.report.split == "test" and run.baseline.backend_id == "levenshtein"
    assert run.report.f1 > run.baseline.f1
    assert run.calibration.backend_id == run.report.backend_id

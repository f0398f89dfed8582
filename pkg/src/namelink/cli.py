"""Command-line driver for every pipeline stage.

Exit status: 0 on success, 1 on a domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .curriculum import (
    AugmentRates,
    Split,
    augment_all,
    augment_permute,
    augment_space_removal,
    augment_swap,
    build_phase1_file,
    build_phase2_file,
    enforce_disjointness,
    read_corpus,
    synth_corpus,
    write_corpus,
)
from .errors import NameLinkError
from .evaluator import emit_report, evaluate_baseline, evaluate_pipeline, read_reports, write_reports
from .gateway import decide, score_pair
from .normalizer import normalize
from .parser import NameLexicon, analyze, default_lexicon, parse, to_schema_text

__all__ = ["main", "build_parser"]

_STEPS = ("swap", "permute", "space")


def _lexicon(args) -> NameLexicon:
    return NameLexicon.load(args.lexicon) if getattr(args, "lexicon", None) else default_lexicon()


def _state(args):
    """Backend, template and threshold resolved with flag > env > file precedence."""
    from .service.app import ServiceState
    from .service.config import load_config

    overrides = {
        "backend": args.backend,
        "backend_url": args.url,
        "threshold": args.threshold,
        "calibration_path": args.calibration,
        "lexicon_path": getattr(args, "lexicon", None),
        "template_path": args.template,
        "timeout_ms": args.timeout_ms,
    }
    return ServiceState.from_config(load_config(args.config, overrides=overrides))


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_normalize(args) -> int:
    for raw in args.names:
        n = normalize(raw)
        print(json.dumps({"text": n.text, "script": n.script.value}, ensure_ascii=False) if args.json else n.text)
    return 0


def cmd_parse(args) -> int:
    lexicon = _lexicon(args)
    for raw in args.names:
        info = analyze(raw, lexicon)
        if args.annotations:
            print(json.dumps({"schema": json.loads(to_schema_text(info.parsed)),
                              "annotations": info.annotations()}, ensure_ascii=False))
        else:
            print(to_schema_text(info.parsed))
    return 0


def cmd_match(args) -> int:
    state = _state(args)
    name1, name2 = state.normalized_pair(args.name1, args.name2)
    scores = score_pair(state.backend, name1.text, name2.text, state.template)
    d = decide(scores, state.threshold, state.backend.backend_id)
    if args.json:
        print(json.dumps({"verdict": d.answer, "probability": d.probability, "threshold": d.threshold,
                          "backend_id": d.backend_id}))
    else:
        print(d.answer)
    return 0


def cmd_synth(args) -> int:
    c = synth_corpus(args.n, seed=args.seed, lexicon=_lexicon(args), split=args.split)
    write_corpus(c, args.out)
    print(f"wrote {len(c)} pairs to {args.out}", file=sys.stderr)
    return 0


def cmd_augment(args) -> int:
    lexicon = _lexicon(args)
    c = read_corpus(args.input, seed=args.seed, dedupe=True)
    before = len(c)
    rates = AugmentRates(args.permute_rate, args.space_rate, args.space_probability)
    steps = args.steps.split(",")
    if set(steps) - set(_STEPS):
        raise SystemExit(f"unknown augmentation step in {args.steps!r}; choose from {','.join(_STEPS)}")
    if steps == list(_STEPS):
        c = augment_all(c, lexicon, seed=args.seed, rates=rates)
    else:
        for step in steps:
            if step == "swap":
                c = augment_swap(c)
            elif step == "permute":
                c = augment_permute(c, lexicon, seed=args.seed, rate=rates.permute_rate)
            else:
                c = augment_space_removal(c, rates.space_probability, seed=args.seed + 1, rate=rates.space_rate)
    write_corpus(c, args.out)
    print(f"{before} -> {len(c)} pairs", file=sys.stderr)
    return 0


def cmd_build_phase1(args) -> int:
    lexicon = _lexicon(args)
    lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    names = [normalize(line) for line in lines if normalize(line).text]
    n = build_phase1_file(((name, parse(name, lexicon)) for name in names), args.out)
    print(f"wrote {n} records to {args.out}", file=sys.stderr)
    return 0


def cmd_build_phase2(args) -> int:
    from .curriculum.prompts import PromptTemplate, default_template

    template = PromptTemplate.load(args.template) if args.template else default_template()
    n = build_phase2_file(read_corpus(args.input), template, args.out)
    print(f"wrote {n} records to {args.out}", file=sys.stderr)
    return 0


def cmd_disjoint(args) -> int:
    train = read_corpus(args.train, split=Split.TRAIN)
    kept, removed = train, 0
    for path in args.test:
        kept, r = enforce_disjointness(kept, read_corpus(path, split=Split.TEST), _lexicon(args))
        removed += r
    write_corpus(kept, args.out)
    print(f"removed {removed} of {len(train)} training pairs", file=sys.stderr)
    return 0


def cmd_calibrate(args) -> int:
    from .pipeline import calibrate_backend

    state = _state(args)
    cal = calibrate_backend(read_corpus(args.input, split=Split.VALIDATION), state.backend, state.template)
    _write(args.out, cal.to_json())
    return 0


def cmd_evaluate(args) -> int:
    state = _state(args)
    corpus = read_corpus(args.input, split=args.split)
    reports = []
    if args.baseline:
        reports.append(evaluate_baseline(corpus, args.baseline_threshold))
    reports.append(evaluate_pipeline(corpus, state.backend, state.template, state.threshold))
    if args.out:
        write_reports(reports, args.out)
    emit_report(reports, sys.stdout)
    return 0


def cmd_report(args) -> int:
    reports = [r for path in args.reports for r in read_reports(path)]
    emit_report(reports, sys.stdout)
    return 0


def cmd_pipeline(args) -> int:
    from .pipeline import run_desk_pipeline

    run = run_desk_pipeline(args.n, args.seed, _lexicon(args))
    if args.out:
        write_reports(run.reports, args.out)
    emit_report(run.reports, sys.stdout)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import ServiceState, create_app, create_scorer_app
    from .service.config import load_config

    overrides = {
        "host": args.host, "port": args.port, "backend": args.backend, "backend_url": args.url,
        "threshold": args.threshold, "calibration_path": args.calibration,
        "lexicon_path": args.lexicon, "template_path": args.template,
        "batch_size": args.batch_size, "timeout_ms": args.timeout_ms,
    }
    config = load_config(args.config, overrides=overrides)
    if args.role == "scorer":
        app = create_scorer_app(ServiceState.from_config(config).backend)
    else:
        app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


# -- argument parsing -------------------------------------------------------


def _add_backend_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON service config file")
    p.add_argument("--backend", choices=("mock", "remote"))
    p.add_argument("--url", help="scorer URL for --backend remote")
    p.add_argument("--threshold", type=float, help="override the calibrated threshold")
    p.add_argument("--calibration", help="calibration JSON (default: shipped artifact)")
    p.add_argument("--template", help="prompt template JSON")
    p.add_argument("--timeout-ms", type=int, dest="timeout_ms")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="namelink", description="Structure-aware person-name matching.")
    parser.add_argument("--lexicon", help="name lexicon TSV (default: shipped lexicon)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("normalize", help="print normalized names")
    p.add_argument("names", nargs="+")
    p.add_argument("--json", action="store_true", help="also report the script")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("parse", help="print the structured schema of names")
    p.add_argument("names", nargs="+")
    p.add_argument("--annotations", action="store_true", help="include honorific and patronymic annotations")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("match", help="decide whether two names refer to the same person")
    p.add_argument("--name1", required=True)
    p.add_argument("--name2", required=True)
    p.add_argument("--json", action="store_true")
    _add_backend_args(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", choices=[s.value for s in Split], default=Split.TRAIN.value)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("augment", help="swap / permute / space-removal augmentation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", default=",".join(_STEPS), help="comma-separated subset of swap,permute,space")
    p.add_argument("--permute-rate", type=float, default=AugmentRates.permute_rate)
    p.add_argument("--space-rate", type=float, default=AugmentRates.space_rate)
    p.add_argument("--space-probability", type=float, default=AugmentRates.space_probability)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("build-phase1", help="structure-training records from a names file")
    p.add_argument("--in", dest="input", required=True, help="one raw name per line")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_phase1)

    p = sub.add_parser("build-phase2", help="matching-training records from a corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--template")
    p.set_defaults(func=cmd_build_phase2)

    p = sub.add_parser("disjoint", help="drop training pairs that share names with held-out corpora")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True, action="append")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_disjoint)

    p = sub.add_parser("calibrate", help="F1-maximizing threshold on a validation corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    _add_backend_args(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="score a held-out corpus and print the report table")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--split", choices=("validation", "test"), default="test")
    p.add_argument("--out", help="write reports as JSON lines")
    p.add_argument("--baseline", action="store_true", help="also run the Levenshtein baseline")
    p.add_argument("--baseline-threshold", type=float, default=0.8)
    _add_backend_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render saved reports as a table")
    p.add_argument("reports", nargs="+")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pipeline", help="synth -> augment -> split -> calibrate -> evaluate")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--role", choices=("match", "scorer"), default="match")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    _add_backend_args(p)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NameLinkError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

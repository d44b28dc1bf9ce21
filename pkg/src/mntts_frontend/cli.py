"""Batch command-line surface wiring the toolkit into one pipeline.

Commands: ``translit``, ``annotate``, ``train``, ``predict``, ``export``,
``eval``, ``validate``. Exit codes are stable across commands: 0 success,
2 usage or configuration problem, 3 data or processing failure. Batch
commands isolate per-record failures and keep going.

Training data export and synthesis-input prediction are deliberately
separate paths: ``export`` embeds ground-truth annotations and accepts no
model; ``predict`` requires a model and never touches ground truth.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dataset as dataset_mod
from . import metrics as metrics_mod
from . import predictor as predictor_mod
from .annotate import AnnotateSettings, BreakThresholds, annotate_corpus
from .config import PipelineConfig, load_config, require_path
from .errors import ToolkitError, UsageError
from .prosody import (
    read_annotations_jsonl,
    serialize_markup,
    tokenize,
    write_annotations_jsonl,
)
from .translit import (
    Script,
    ScriptText,
    latin_to_cyrillic,
    load_mapping_table,
    packaged_table_path,
    transliterate,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3

CHAINS = {
    ("latin", "traditional"),
    ("traditional", "cyrillic"),
    ("latin", "cyrillic"),
}


def _load_tables(config: PipelineConfig, need_first: bool, need_second: bool):
    first = second = None
    if need_first:
        path = (
            require_path(config.latin_traditional_table, "latin->traditional table")
            if config.latin_traditional_table
            else packaged_table_path("latin_traditional.tsv")
        )
        first = load_mapping_table(path)
    if need_second:
        path = (
            require_path(config.traditional_cyrillic_table, "traditional->cyrillic table")
            if config.traditional_cyrillic_table
            else packaged_table_path("traditional_cyrillic.tsv")
        )
        second = load_mapping_table(path)
    return first, second


def cmd_translit(args, config: PipelineConfig) -> int:
    chain = (args.source, args.target)
    if chain not in CHAINS:
        raise UsageError(f"unsupported conversion {args.source} -> {args.target}")
    in_path = Path(args.infile)
    if not in_path.is_file():
        raise UsageError(f"input file {in_path} not found")
    first, second = _load_tables(
        config,
        need_first=args.source == "latin",
        need_second=args.target == "cyrillic",
    )
    for table in (first, second):
        if table is not None:
            for warning in table.warnings:
                print(f"table warning: {warning}", file=sys.stderr)
    out_lines = []
    unmatched_total = 0
    with open(in_path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if chain == ("latin", "cyrillic"):
                result = latin_to_cyrillic(ScriptText(Script.LATIN, line), first, second)
            elif chain == ("latin", "traditional"):
                result = transliterate(ScriptText(Script.LATIN, line), first)
            else:
                result = transliterate(ScriptText(Script.TRADITIONAL, line), second)
            out_lines.append(result.text)
            for miss in result.unmatched:
                print(
                    f"line {line_no}: unmatched {miss.char!r} at {miss.index} ({miss.table})",
                    file=sys.stderr,
                )
                unmatched_total += 1
    text = "".join(line + "\n" for line in out_lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"converted={len(out_lines)} unmatched={unmatched_total}", file=sys.stderr)
    return EXIT_OK


def _annotate_settings(args, config: PipelineConfig) -> AnnotateSettings:
    def pick(flag, key):
        return flag if flag is not None else getattr(config, key)

    return AnnotateSettings(
        thresholds=BreakThresholds(
            b3_min=pick(args.b3_min, "b3_min"),
            b2_min=pick(args.b2_min, "b2_min"),
            b1_min=pick(args.b1_min, "b1_min"),
        ),
        frame_length=pick(args.frame_length, "frame_length"),
        hop=pick(args.hop, "hop"),
        threshold_db=pick(args.threshold_db, "threshold_db"),
        min_pause=pick(args.min_pause, "min_pause"),
        alignment_policy=pick(args.alignment_policy, "alignment_policy"),
        alignment_dir=config.alignment_dir,
    )


def cmd_annotate(args, config: PipelineConfig) -> int:
    root = require_path(args.root or config.dataset_root, "dataset root")
    split = dataset_mod.load_split(root, args.split, config.metadata_delimiter)
    settings = _annotate_settings(args, config)
    records = [(r.record_id, r.text, r.wav_path) for r in split.records]
    annotations, failures = annotate_corpus(records, settings, jobs=config.jobs)
    out_path = Path(args.out) if args.out else Path(f"annotations_{args.split}.jsonl")
    with open(out_path, "w", encoding="utf-8") as fh:
        write_annotations_jsonl(fh, annotations)
    errors_path = Path(args.errors_out) if args.errors_out else out_path.with_name("errors.jsonl")
    with open(errors_path, "w", encoding="utf-8") as fh:
        for failure in failures:
            json.dump(
                {"id": failure.record_id, "stage": failure.stage, "message": failure.message},
                fh,
                ensure_ascii=False,
                sort_keys=True,
            )
            fh.write("\n")
    print(f"annotated={len(annotations)} failed={len(failures)}", file=sys.stderr)
    return EXIT_OK


def cmd_train(args, config: PipelineConfig) -> int:
    annotations_path = Path(args.annotations)
    if not annotations_path.is_file():
        raise UsageError(f"annotations file {annotations_path} not found")
    with open(annotations_path, encoding="utf-8") as fh:
        corpus = [annotation for _, annotation in read_annotations_jsonl(fh)]
    model = predictor_mod.train(
        corpus,
        epochs=args.epochs if args.epochs is not None else config.epochs,
        seed=config.seed,
        buckets=args.buckets if args.buckets is not None else config.buckets,
    )
    predictor_mod.save_model(model, args.out)
    accuracy = predictor_mod.training_accuracy(model, corpus)
    print(f"trained on {len(corpus)} utterances, boundary accuracy {accuracy:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_predict(args, config: PipelineConfig) -> int:
    model_path = Path(args.model)
    if not model_path.is_file():
        raise UsageError(f"model file {model_path} not found")
    model = predictor_mod.load_model(model_path)
    in_path = Path(args.infile)
    if not in_path.is_file():
        raise UsageError(f"input file {in_path} not found")
    results = []
    with open(in_path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if args.metadata:
                if config.metadata_delimiter not in line:
                    raise ToolkitError(f"{in_path}:{line_no}: no delimiter in metadata line")
                record_id, text = line.split(config.metadata_delimiter, 1)
            else:
                record_id, text = f"line-{line_no:04d}", line
            annotation = predictor_mod.predict(model, tokenize(text))
            results.append((record_id.strip(), annotation))
    out_fh = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.format == "jsonl":
            write_annotations_jsonl(out_fh, results)
        else:
            for _, annotation in results:
                out_fh.write(serialize_markup(annotation) + "\n")
    finally:
        if args.out:
            out_fh.close()
    print(f"predicted={len(results)}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args, config: PipelineConfig) -> int:
    root = require_path(args.root or config.dataset_root, "dataset root")
    split = dataset_mod.load_split(root, args.split, config.metadata_delimiter)
    annotations_path = Path(args.annotations)
    if not annotations_path.is_file():
        raise UsageError(f"annotations file {annotations_path} not found")
    with open(annotations_path, encoding="utf-8") as fh:
        annotations = dict(read_annotations_jsonl(fh))
    exported, failures = dataset_mod.export_training_labels(split, annotations)
    out_path = Path(args.out) if args.out else Path(f"labels_{args.split}.jsonl")
    with open(out_path, "w", encoding="utf-8") as fh:
        dataset_mod.write_labels_jsonl(fh, exported)
    for failure in failures:
        print(f"skipped {failure.record_id}: {failure.message}", file=sys.stderr)
    print(f"exported={len(exported)} failed={len(failures)}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args, config: PipelineConfig) -> int:
    with open(args.gold, encoding="utf-8") as fh:
        gold = read_annotations_jsonl(fh)
    with open(args.pred, encoding="utf-8") as fh:
        predicted = read_annotations_jsonl(fh)
    scores = metrics_mod.boundary_scores(gold, predicted)
    report: dict = {"boundaries": scores.to_dict(), "wer": None}
    if (args.ref is None) != (args.hyp is None):
        raise UsageError("--ref and --hyp must be given together")
    if args.ref:
        ref_lines = Path(args.ref).read_text(encoding="utf-8").splitlines()
        hyp_lines = Path(args.hyp).read_text(encoding="utf-8").splitlines()
        if len(ref_lines) != len(hyp_lines):
            raise metrics_mod.MismatchedCorpusError(
                f"{len(ref_lines)} reference lines vs {len(hyp_lines)} hypothesis lines"
            )
        s = i = d = n = 0
        for ref_line, hyp_line in zip(ref_lines, hyp_lines):
            breakdown = metrics_mod.wer(ref_line.split(), hyp_line.split())
            s += breakdown.substitutions
            i += breakdown.insertions
            d += breakdown.deletions
            n += breakdown.reference_length
        report["wer"] = metrics_mod.WerBreakdown(s, i, d, n).to_dict()
    text = json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args, config: PipelineConfig) -> int:
    root = require_path(args.root or config.dataset_root, "dataset root")
    report = dataset_mod.validate_corpus(root, config.metadata_delimiter)
    for name in dataset_mod.SPLITS:
        print(f"{name}: {report.counts[name]} records (expected {report.expected[name]})")
    print(f"flag: {report.flag}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mntts-frontend",
        description="Mongolian TTS front-end: transliteration, prosody annotation, prediction, export",
    )
    parser.add_argument("--config", help="pipeline config file (key = value lines)")
    parser.add_argument("--jobs", type=int, help="parallel workers for batch commands")
    parser.add_argument("--seed", type=int, help="RNG seed override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translit", help="convert between writing systems, line by line")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--from", dest="source", required=True, choices=["latin", "traditional"])
    p.add_argument("--to", dest="target", required=True, choices=["traditional", "cyrillic"])
    p.set_defaults(func=cmd_translit)

    p = sub.add_parser("annotate", help="annotate a dataset split from audio + text")
    p.add_argument("--root", help="dataset root (or config dataset_root)")
    p.add_argument("--split", default="train", choices=list(dataset_mod.SPLITS))
    p.add_argument("--out", help="annotations JSONL path")
    p.add_argument("--errors-out", help="errors JSONL path")
    p.add_argument("--frame-length", type=float, dest="frame_length")
    p.add_argument("--hop", type=float)
    p.add_argument("--threshold-db", type=float, dest="threshold_db")
    p.add_argument("--min-pause", type=float, dest="min_pause")
    p.add_argument("--b1-min", type=float, dest="b1_min")
    p.add_argument("--b2-min", type=float, dest="b2_min")
    p.add_argument("--b3-min", type=float, dest="b3_min")
    p.add_argument("--alignment-policy", choices=["auto", "file", "estimate"], dest="alignment_policy")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("train", help="train the break predictor on annotations")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--epochs", type=int)
    p.add_argument("--buckets", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict break markup for plain text (model required)")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=["markup", "jsonl"], default="markup")
    p.add_argument("--metadata", action="store_true", help="input lines are id|text")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("export", help="export ground-truth character labels (no model involved)")
    p.add_argument("--root")
    p.add_argument("--split", default="train", choices=list(dataset_mod.SPLITS))
    p.add_argument("--annotations", required=True, help="ground-truth annotations JSONL")
    p.add_argument("--out", help="labels JSONL path")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("eval", help="score predicted annotations (and optionally transcripts)")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", help="reference transcript, one utterance per line")
    p.add_argument("--hyp", help="hypothesis transcript, line-paired with --ref")
    p.add_argument("--out", help="report JSON path (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("validate", help="audit a dataset layout and record counts")
    p.add_argument("--root")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else PipelineConfig()
        if args.jobs is not None:
            if args.jobs < 1:
                raise UsageError("--jobs must be >= 1")
            config.jobs = args.jobs
        if args.seed is not None:
            config.seed = args.seed
        return args.func(args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

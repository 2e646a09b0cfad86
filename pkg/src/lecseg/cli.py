"""Command-line interface.

Subcommands: edge-weights, segment, annotate, fuse, eval, pipeline and
gen-fixture.  Exit codes: 0 on success, 2 on input/validation problems, 3 when
a pipeline stage fails.  Set LECSEG_LOG=debug|info|warning for verbosity.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from . import corpus
from .corpus import InputError, find_concept_mentions
from .embedding import (
    SimilarityDictionary,
    build_similarity_dictionary,
    iter_embedding_requests,
    write_embedding_requests,
)
from .evaluation import evaluate
from .fixtures import generate_fixture, write_fixture
from .fusion import FusionConfig, annotate, fuse
from .pipeline import (
    PipelineConfig,
    load_inputs,
    semantic_pipeline,
    structural_pipeline,
)
from .report import format_table, render_figures, write_report_csv, write_report_json
from .segments import (
    AnnotatedSegment,
    TopicBoundaryList,
    annotated_to_json,
    boundary_list,
    load_segments,
)
from .structural import LogisticBoundaryScorer, load_sentence_encodings, window_sentences

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PIPELINE = 3

log = logging.getLogger("lecseg")


@contextmanager
def _stage(name: str):
    """Tag non-input failures with the pipeline stage they came from."""
    try:
        yield
    except InputError:
        raise
    except Exception as exc:
        exc.lecseg_stage = name
        raise


def _setup_logging() -> None:
    level = os.environ.get("LECSEG_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(message)s")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    config = (
        PipelineConfig.from_json(args.config)
        if getattr(args, "config", None)
        else PipelineConfig()
    )
    overrides = {}
    for name in (
        "transcript",
        "timeline",
        "kg",
        "lexicon",
        "syllabus",
        "embeddings",
        "ground_truth",
        "sentence_length",
        "context_size",
        "primary_fraction",
        "fusion_threshold",
        "co_occurrence_window",
        "case_c_strictness",
        "eval_tolerance",
        "boundary_threshold",
        "eval_unit",
    ):
        if getattr(args, name, None) is not None:
            overrides[name] = getattr(args, name)
    return config.override(**overrides)


def _require(config: PipelineConfig, *names: str) -> None:
    missing = [n for n in names if not getattr(config, n)]
    if missing:
        raise InputError(f"missing required input(s): {', '.join(missing)}")


def _write(path: str | Path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def _load_dictionary(args, config: PipelineConfig, inputs) -> SimilarityDictionary:
    if getattr(args, "dict", None):
        return SimilarityDictionary.load_tsv(args.dict)
    _require(config, "lexicon")
    lexicon = inputs.lexicon or corpus.load_lexicon(config.lexicon)
    with _stage("edge-weights"):
        mentions = find_concept_mentions(inputs.transcript, lexicon)
        return build_similarity_dictionary(
            inputs.transcript, mentions, inputs.provider, window=config.co_occurrence_window
        )


def cmd_edge_weights(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    _require(config, "transcript", "lexicon")
    if not args.fallback_embedder and not config.embeddings and not args.emit_requests:
        raise InputError("need --embeddings, --fallback-embedder or --emit-requests")
    if not args.emit_requests and not args.out:
        raise InputError("--out is required when building the dictionary")
    inputs = load_inputs(config, use_fallback=args.fallback_embedder)
    lexicon = inputs.lexicon
    with _stage("edge-weights"):
        mentions = find_concept_mentions(inputs.transcript, lexicon)
        if args.emit_requests:
            requests = iter_embedding_requests(
                inputs.transcript, mentions, window=config.co_occurrence_window
            )
            write_embedding_requests(args.emit_requests, requests)
            print(f"{len(requests)} embedding requests -> {args.emit_requests}")
            return EXIT_OK
        sim_dict = build_similarity_dictionary(
            inputs.transcript, mentions, inputs.provider, window=config.co_occurrence_window
        )
        sim_dict.save_tsv(args.out)
    print(f"{len(sim_dict)} concept pairs -> {args.out}")
    return EXIT_OK


def _segment_once(args, config: PipelineConfig, inputs) -> TopicBoundaryList:
    mode = args.mode
    semantic = structural = None
    if mode in ("semantic", "fused"):
        _require(config, "timeline", "kg", "lexicon")
        sim_dict = _load_dictionary(args, config, inputs)
        with _stage("semantic-segmentation"):
            semantic = semantic_pipeline(
                inputs.transcript,
                inputs.timeline,
                inputs.lexicon,
                inputs.kg,
                sim_dict,
                primary_fraction=config.primary_fraction,
                case_c_strictness=config.case_c_strictness,
                dump_graphs=getattr(args, "dump_graphs", None),
            )
    if mode in ("structural", "fused"):
        scorer = None
        if getattr(args, "weights", None):
            scorer = LogisticBoundaryScorer.from_file(args.weights)
        encodings = None
        if getattr(args, "sentence_encodings", None):
            sequence = window_sentences(inputs.transcript, config.sentence_length)
            encodings = load_sentence_encodings(args.sentence_encodings, len(sequence))
        with _stage("structural-segmentation"):
            structural = structural_pipeline(
                inputs.transcript, inputs.provider, config, scorer=scorer, encodings=encodings
            )
    if mode == "semantic":
        return semantic
    if mode == "structural":
        return structural
    with _stage("fusion"):
        return fuse(structural, semantic, FusionConfig(config.fusion_threshold))


def cmd_segment(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    _require(config, "transcript")
    if not args.emit_sentences and not args.out:
        raise InputError("--out is required when segmenting")
    inputs = load_inputs(config, use_fallback=args.fallback_embedder)
    if args.emit_sentences:
        sequence = window_sentences(inputs.transcript, config.sentence_length)
        lines = [
            json.dumps({"key": str(i), "tokens": list(s)})
            for i, s in enumerate(sequence.sentences)
        ]
        _write(args.emit_sentences, "\n".join(lines) + ("\n" if lines else ""))
        print(f"{len(lines)} sentences -> {args.emit_sentences}")
        return EXIT_OK
    boundaries = _segment_once(args, config, inputs)
    if config.syllabus and inputs.timeline is not None:
        with _stage("annotation"):
            annotated = annotate(
                boundaries, inputs.timeline, inputs.syllabus, inputs.provider
            )
        _write(args.out, annotated_to_json(annotated))
    else:
        _write(args.out, boundaries.to_json())
    print(f"{len(boundaries.segments)} segments -> {args.out}")
    return EXIT_OK


def cmd_annotate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    _require(config, "transcript", "timeline", "syllabus")
    inputs = load_inputs(config, use_fallback=args.fallback_embedder)
    segments = boundary_list(load_segments(args.segments))
    with _stage("annotation"):
        annotated = annotate(segments, inputs.timeline, inputs.syllabus, inputs.provider)
    _write(args.out, annotated_to_json(annotated))
    print(f"{len(annotated)} segments annotated -> {args.out}")
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace) -> int:
    structural = boundary_list(load_segments(args.structural))
    semantic = boundary_list(load_segments(args.semantic))
    threshold = args.fusion_threshold if args.fusion_threshold is not None else 900.0
    with _stage("fusion"):
        fused = fuse(structural, semantic, FusionConfig(threshold))
    _write(args.out, fused.to_json())
    print(f"{len(fused.segments)} segments -> {args.out}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    _require(config, "ground_truth")
    gt = corpus.load_ground_truth(config.ground_truth)
    segments = load_segments(args.segments)
    with _stage("evaluation"):
        result = evaluate(
            gt,
            segments,
            unit=config.eval_unit,
            k=args.k,
            tolerance=config.eval_tolerance,
        )
    if args.out:
        write_report_json(result, args.out)
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        write_report_csv(result, args.csv)
    if args.figures:
        render_figures(gt, segments, result, args.figures)
    if args.table or not args.out:
        print(format_table(result), end="")
    return EXIT_OK


def _run_pipeline_config(config_path: str, out_dir: str, fallback: bool) -> str:
    config = PipelineConfig.from_json(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    inputs = load_inputs(config, use_fallback=fallback)
    _require(config, "transcript", "timeline", "kg", "lexicon")

    with _stage("edge-weights"):
        mentions = find_concept_mentions(inputs.transcript, inputs.lexicon)
        sim_dict = build_similarity_dictionary(
            inputs.transcript, mentions, inputs.provider, window=config.co_occurrence_window
        )
        sim_dict.save_tsv(out / "edge_weights.tsv")
    with _stage("semantic-segmentation"):
        semantic = semantic_pipeline(
            inputs.transcript,
            inputs.timeline,
            inputs.lexicon,
            inputs.kg,
            sim_dict,
            primary_fraction=config.primary_fraction,
            case_c_strictness=config.case_c_strictness,
        )
        _write(out / "segments_semantic.json", semantic.to_json())
    with _stage("structural-segmentation"):
        structural = structural_pipeline(inputs.transcript, inputs.provider, config)
        _write(out / "segments_structural.json", structural.to_json())
    with _stage("fusion"):
        fused = fuse(structural, semantic, FusionConfig(config.fusion_threshold))
        _write(out / "segments_fused.json", fused.to_json())
    final_segments: list[AnnotatedSegment]
    if inputs.syllabus:
        with _stage("annotation"):
            annotated = annotate(fused, inputs.timeline, inputs.syllabus, inputs.provider)
            _write(out / "annotated.json", annotated_to_json(annotated))
        final_segments = annotated
    else:
        final_segments = [AnnotatedSegment(s, e) for s, e in fused.segments]
    if inputs.ground_truth is not None:
        with _stage("evaluation"):
            result = evaluate(
                inputs.ground_truth,
                final_segments,
                unit=config.eval_unit,
                tolerance=config.eval_tolerance,
            )
            write_report_json(result, out / "report.json")
            write_report_csv(result, out / "report.csv")
            _write(out / "report.txt", format_table(result))
            render_figures(inputs.ground_truth, final_segments, result, out / "figures")
    return str(out)


def cmd_pipeline(args: argparse.Namespace) -> int:
    configs = args.config
    if len(configs) == 1:
        out = _run_pipeline_config(configs[0], args.out_dir, args.fallback_embedder)
        print(f"pipeline outputs -> {out}")
        return EXIT_OK
    # several videos: one sub-directory per config, optionally in parallel
    jobs = max(1, args.jobs)
    targets = [
        (cfg, str(Path(args.out_dir) / Path(cfg).stem)) for cfg in configs
    ]
    if jobs == 1:
        for cfg, sub in targets:
            _run_pipeline_config(cfg, sub, args.fallback_embedder)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_pipeline_config, cfg, sub, args.fallback_embedder)
                for cfg, sub in targets
            ]
            for fut in futures:
                fut.result()
    for _, sub in targets:
        print(f"pipeline outputs -> {sub}")
    return EXIT_OK


def cmd_gen_fixture(args: argparse.Namespace) -> int:
    fixture = generate_fixture(
        seed=args.seed,
        topics=args.topics,
        topic_duration=(args.duration_min, args.duration_max),
    )
    paths = write_fixture(fixture, args.out_dir)
    print(
        f"fixture seed={args.seed} topics={len(fixture.ground_truth.topics)} -> "
        + str(Path(args.out_dir))
    )
    for name in sorted(paths):
        log.info("wrote %s", paths[name])
    return EXIT_OK


def _add_io_flags(p: argparse.ArgumentParser, *names: str) -> None:
    flags = {
        "config": lambda: p.add_argument("--config", help="pipeline config JSON"),
        "transcript": lambda: p.add_argument("--transcript"),
        "timeline": lambda: p.add_argument("--timeline"),
        "kg": lambda: p.add_argument("--kg"),
        "lexicon": lambda: p.add_argument("--lexicon"),
        "syllabus": lambda: p.add_argument("--syllabus"),
        "embeddings": lambda: p.add_argument("--embeddings", help="vector JSONL file"),
        "ground_truth": lambda: p.add_argument("--ground-truth", dest="ground_truth"),
        "fallback": lambda: p.add_argument(
            "--fallback-embedder",
            action="store_true",
            help="use the built-in deterministic embedding provider",
        ),
    }
    for name in names:
        flags[name]()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lecseg",
        description="Topic segmentation of long lecture recordings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("edge-weights", help="build the concept-pair similarity dictionary")
    _add_io_flags(p, "config", "transcript", "lexicon", "embeddings", "fallback")
    p.add_argument("--co-occurrence-window", dest="co_occurrence_window", type=int)
    p.add_argument("--emit-requests", help="write the embedding request list and stop")
    p.add_argument("--out", help="output dictionary TSV")
    p.set_defaults(func=cmd_edge_weights)

    p = sub.add_parser("segment", help="segment one video")
    _add_io_flags(
        p, "config", "transcript", "timeline", "kg", "lexicon", "syllabus",
        "embeddings", "fallback",
    )
    p.add_argument("--mode", choices=("semantic", "structural", "fused"), default="fused")
    p.add_argument("--dict", help="similarity dictionary TSV (else built in-process)")
    p.add_argument("--sentence-encodings", dest="sentence_encodings")
    p.add_argument("--weights", help="classifier weights JSON for the structural scorer")
    p.add_argument("--sentence-length", dest="sentence_length", type=int)
    p.add_argument("--context-size", dest="context_size", type=int)
    p.add_argument("--primary-fraction", dest="primary_fraction", type=float)
    p.add_argument("--fusion-threshold", dest="fusion_threshold", type=float)
    p.add_argument("--boundary-threshold", dest="boundary_threshold", type=float)
    p.add_argument(
        "--case-c-strictness", dest="case_c_strictness", choices=("verbatim", "strict")
    )
    p.add_argument("--emit-sentences", help="write sentence windows JSONL and stop")
    p.add_argument("--dump-graphs", dest="dump_graphs", help="debug JSONL of slide graphs")
    p.add_argument("--out", help="output segmentation JSON")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("annotate", help="assign syllabus names to segments")
    _add_io_flags(p, "config", "transcript", "timeline", "syllabus", "embeddings", "fallback")
    p.add_argument("--segments", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("fuse", help="fuse structural and semantic segmentations")
    p.add_argument("--structural", required=True)
    p.add_argument("--semantic", required=True)
    p.add_argument("--fusion-threshold", dest="fusion_threshold", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="score a segmentation against ground truth")
    _add_io_flags(p, "config", "ground_truth")
    p.add_argument("--segments", required=True)
    p.add_argument("--eval-unit", dest="eval_unit", type=float)
    p.add_argument("--k", type=int, help="probe distance in units (default: auto)")
    p.add_argument("--eval-tolerance", dest="eval_tolerance", type=float)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--csv", help="report CSV path")
    p.add_argument("--table", action="store_true", help="print the plain-text table")
    p.add_argument("--figures", help="directory for rendered figures")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config file")
    p.add_argument("--config", nargs="+", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--jobs", type=int, default=1, help="parallel videos (multi-config only)")
    p.add_argument("--fallback-embedder", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("gen-fixture", help="generate a planted-topic synthetic video")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--topics", type=int)
    p.add_argument("--duration-min", dest="duration_min", type=float, default=600.0)
    p.add_argument("--duration-max", dest="duration_max", type=float, default=1500.0)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_gen_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pipeline failure with stage attribution
        stage = getattr(exc, "lecseg_stage", args.command)
        print(f"pipeline error in {stage}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())

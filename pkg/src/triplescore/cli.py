"""Command-line surface: build, predict, score, evaluate, analyze.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import analysis, pipeline
from .corpus import load_scored
from .errors import DataFormatError, InvariantError, TripleScoreError
from .features import write_feature_matrix
from .keywords import write_rankings
from .learn import write_models
from .pipeline import KINDS, PipelineConfig
from .tree import write_tree

log = logging.getLogger("triplescore")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the documented usage code is 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise SystemExit(f"error: {message}") from None


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("pipeline configuration")
    g.add_argument("--config", type=Path, help="JSON config file; flags win over it")
    g.add_argument("--sentences", type=Path, help="annotated sentence corpus")
    g.add_argument("--persons", type=Path, help="person<TAB>freebase_id file")
    g.add_argument("--stopwords", type=Path, help="stopword list, one term per line")
    g.add_argument("--profession-kb", type=Path, dest="profession_kb")
    g.add_argument("--profession-train", type=Path, dest="profession_train")
    g.add_argument("--nationality-kb", type=Path, dest="nationality_kb")
    g.add_argument("--nationality-train", type=Path, dest="nationality_train")
    g.add_argument(
        "--kind",
        action="append",
        choices=KINDS,
        dest="kinds",
        help="relation kind to process (repeatable; default both)",
    )
    g.add_argument("--cache-dir", type=Path, dest="cache_dir")
    g.add_argument("--out-dir", type=Path, dest="out_dir")
    g.add_argument("--seed", type=int)
    g.add_argument("--folds", type=int, help="cross-validation folds")
    g.add_argument(
        "--group-folds-by-person",
        action="store_const",
        const=True,
        dest="group_folds_by_person",
    )
    g.add_argument("--keyword-top", type=int, dest="keyword_top")
    g.add_argument("--lr-top", type=int, dest="lr_top")
    g.add_argument("--wkc-top", type=int, dest="wkc_top")
    g.add_argument("--negative-ratio", type=int, dest="negative_ratio")
    g.add_argument("--lr-cost", type=float, dest="lr_cost")
    g.add_argument("--lr-feature-mode", choices=("counts", "binary"), dest="lr_feature_mode")
    g.add_argument("--wkc-mode", choices=("occurrence", "presence"), dest="wkc_mode")
    g.add_argument(
        "--idf-count-mode", choices=("collection", "sentence"), dest="idf_count_mode"
    )
    g.add_argument("--tie-mode", choices=("half", "exclude"), dest="tie_mode")
    g.add_argument("--fallback-score", type=int, dest="fallback_score")
    g.add_argument("--cp", type=float, help="tree complexity parameter")
    g.add_argument("--min-split", type=int, dest="min_split")
    g.add_argument("--min-bucket", type=int, dest="min_bucket")
    g.add_argument("--max-depth", type=int, dest="max_depth")
    g.add_argument("--mention-open", dest="mention_open")
    g.add_argument("--mention-close", dest="mention_close")
    g.add_argument(
        "--max-parse-failures",
        type=int,
        dest="max_parse_failures",
        help="allowed malformed corpus lines before the build fails",
    )
    g.add_argument(
        "--strict",
        action="store_const",
        const=True,
        help="fail on the first malformed corpus line",
    )
    g.add_argument("--condition", choices=("rel", "full"))
    g.add_argument("--fig2-candidates", type=int, dest="fig2_candidates")


_CONFIG_KEYS = [
    "sentences", "persons", "stopwords",
    "profession_kb", "profession_train", "nationality_kb", "nationality_train",
    "kinds", "cache_dir", "out_dir", "seed", "folds", "group_folds_by_person",
    "keyword_top", "lr_top", "wkc_top", "negative_ratio", "lr_cost",
    "lr_feature_mode", "wkc_mode", "idf_count_mode", "tie_mode",
    "fallback_score", "cp", "min_split", "min_bucket", "max_depth",
    "mention_open", "mention_close", "max_parse_failures", "strict",
    "condition", "fig2_candidates",
]


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    file_values = None
    if args.config is not None:
        try:
            file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataFormatError(f"cannot read config {args.config}: {exc}") from exc
    flag_values = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return PipelineConfig.from_sources(file_values, flag_values)


def cmd_build(args: argparse.Namespace) -> int:
    config = _build_config(args)
    stores, cached = pipeline.build_stores(config)
    if cached:
        print("stores up to date (cache hit)")
        return EXIT_OK
    print(f"lines processed: {stores.build.lines_processed}")
    print(f"linked lines: {stores.build.linked_line_count}")
    print(f"persons with documents: {len(stores.docs)}")
    print(f"parse failures: {stores.build.parse_failure_count}")
    print(f"unknown mentions: {stores.build.unknown_mention_count}")
    config.out_dir.mkdir(parents=True, exist_ok=True)
    for kind in config.kinds:
        path = config.out_dir / f"{kind}.keywords.tsv"
        write_rankings(stores.rankings[kind].values(), path)
        print(f"{kind}: keyword rankings -> {path}")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    config = _build_config(args)
    stores, _ = pipeline.build_stores(config)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    for kind in config.kinds:
        triples = load_scored(config.train_path(kind))
        context = pipeline.make_context(stores, kind, config)
        tree = pipeline.fit_tree_on_triples(context, triples, config)
        rows = pipeline.predict_kind(context, tree, config.condition)
        out_path = config.out_dir / f"{kind}.reference"
        pipeline.write_reference(rows, out_path)
        write_tree(tree, config.out_dir / f"{kind}.tree")
        write_models(context.models, config.out_dir / f"{kind}.classifiers")
        if args.dump_features:
            feature_rows = (
                (person, label, context.vector(person, label))
                for person, label, _ in rows
            )
            write_feature_matrix(feature_rows, config.out_dir / f"{kind}.features.tsv")
        print(f"{kind}: {len(rows)} scored pairs -> {out_path}")
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    lookup = pipeline.read_reference(args.reference)
    fallback = args.fallback
    if not 0 <= fallback <= 7:
        raise DataFormatError(f"fallback score {fallback} outside 0..7")
    bad_lines = 0
    out = sys.stdout
    for line_no, raw in enumerate(sys.stdin, start=1):
        fields = raw.rstrip("\n").split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            bad_lines += 1
            out.write(f"ERROR line {line_no}: expected person<TAB>label\n")
            continue
        out.write(f"{lookup.get((fields[0], fields[1]), fallback)}\n")
    if bad_lines:
        log.error("%d malformed query line(s)", bad_lines)
        return EXIT_DATA
    return EXIT_OK


def _print_report_table(reports: dict[str, dict[str, pipeline.MetricReport]]) -> None:
    kinds = list(reports)

    def cells(metric: str, condition: str) -> str:
        return "/ ".join(
            f"{getattr(reports[kind][condition], metric):.3f}" for kind in kinds
        )

    print(f"conditions evaluated on: {', '.join(kinds)} (train cross-validation)")
    header = f"{'Condition':<16}{'ASD':>16}{'Accuracy':>16}{'Kendall tau':>16}"
    print(header)
    for condition, title in (("rel", "only Rel"), ("full", "with CS")):
        print(
            f"{title:<16}{cells('asd', condition):>16}"
            f"{cells('accuracy', condition):>16}{cells('kendall', condition):>16}"
        )


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _build_config(args)
    stores, _ = pipeline.build_stores(config)
    reports = {
        kind: pipeline.evaluate_kind(stores, kind, config) for kind in config.kinds
    }
    _print_report_table(reports)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _build_config(args)
    stores, _ = pipeline.build_stores(config)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    kind = config.kinds[0]
    triples = load_scored(config.train_path(kind))
    kb = stores.kbs[kind]

    points1, corr1 = analysis.candidate_option_correlation(triples, kb)
    analysis.write_fig1_csv(points1, corr1, config.out_dir / "fig1.csv")
    print(f"fig1: r={corr1.r:.4f} p={corr1.p_value:.4f} n={corr1.n}")

    points2, corr2 = analysis.popularity_correlation(
        triples, kb, stores.docs, config.fig2_candidates
    )
    analysis.write_fig2_csv(
        points2, corr2, config.fig2_candidates, config.out_dir / "fig2.csv"
    )
    if corr2 is None:
        print("fig2: correlation skipped (fewer than 3 points in slice)")
    else:
        print(f"fig2: r={corr2.r:.4f} p={corr2.p_value:.4f} n={corr2.n}")

    samples, summaries = analysis.familiarity_distribution(triples, kb)
    analysis.write_fig3_csv(
        samples, summaries, config.out_dir / "fig3.csv", config.out_dir / "fig3_summary.csv"
    )
    print(f"fig3: {len(samples)} samples across {len(summaries)} discrepancy groups")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="triplescore",
        description="Predict crowdsourced relevance scores for person-label triples.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="parse inputs and cache derived stores")
    _add_config_options(p_build)
    p_build.set_defaults(func=cmd_build)

    p_predict = sub.add_parser("predict", help="write reference score files")
    _add_config_options(p_predict)
    p_predict.add_argument(
        "--dump-features",
        action="store_true",
        dest="dump_features",
        help="also write the scored pairs' feature matrix",
    )
    p_predict.set_defaults(func=cmd_predict)

    p_score = sub.add_parser(
        "score", help="answer person<TAB>label queries from stdin"
    )
    p_score.add_argument(
        "--reference",
        type=Path,
        action="append",
        required=True,
        help="reference file (repeatable)",
    )
    p_score.add_argument(
        "--fallback",
        type=int,
        default=pipeline.FALLBACK_SCORE,
        help="score for pairs absent from the reference files",
    )
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("evaluate", help="cross-validate both feature conditions")
    _add_config_options(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_analyze = sub.add_parser("analyze", help="emit the discrepancy-analysis CSVs")
    _add_config_options(p_analyze)
    p_analyze.set_defaults(func=cmd_analyze)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return EXIT_USAGE
        return EXIT_USAGE if exc.code else EXIT_OK

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except InvariantError as exc:
        log.error("internal invariant violated: %s", exc)
        return EXIT_INTERNAL
    except (TripleScoreError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end orchestration: stores, models, reference files, evaluation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import cache, features, keywords, metrics
from .corpus import (
    DocBuildResult,
    KnowledgeBase,
    ScoredTriple,
    build_person_docs,
    load_kb,
    load_persons,
    load_scored,
)
from .errors import DataFormatError
from .features import FeatureContext, FeatureVector, feature_matrix
from .keywords import CorpusTermStats, KeywordRanking
from .learn import TrainSpec, finalize_score, train_label_models
from .metrics import MetricReport
from .textprep import StopwordSet
from .tree import RegressionTree, TreeParams, fit_regression_tree

log = logging.getLogger(__name__)

KINDS = ("profession", "nationality")
FALLBACK_SCORE = 4


@dataclass
class PipelineConfig:
    """Paths and parameters for one pipeline run.

    Flags beat config-file values, which beat the defaults below.
    """

    sentences: Path | None = None
    persons: Path | None = None
    stopwords: Path | None = None
    profession_kb: Path | None = None
    profession_train: Path | None = None
    nationality_kb: Path | None = None
    nationality_train: Path | None = None
    kinds: tuple[str, ...] = KINDS
    cache_dir: Path = Path("cache")
    out_dir: Path = Path("out")
    seed: int = 0
    folds: int = 10
    group_folds_by_person: bool = False
    keyword_top: int = keywords.TOP_KEYWORDS
    lr_top: int = 50
    wkc_top: int = features.WKC_KEYWORDS
    negative_ratio: int = 10
    lr_cost: float = 1.0
    lr_feature_mode: str = "counts"
    wkc_mode: str = "occurrence"
    idf_count_mode: str = "collection"
    tie_mode: str = "half"
    fallback_score: int = FALLBACK_SCORE
    cp: float = 0.01
    min_split: int = 20
    min_bucket: int = 7
    max_depth: int = 30
    mention_open: str = "["
    mention_close: str = "]"
    max_parse_failures: int | None = None
    strict: bool = False
    condition: str = "full"
    fig2_candidates: int = 3

    def __post_init__(self):
        for kind in self.kinds:
            if kind not in KINDS:
                raise ValueError(f"unknown relation kind {kind!r}")
        if not 0 <= self.fallback_score <= 7:
            raise ValueError("fallback score must lie in 0..7")
        for name in ("keyword_top", "lr_top", "wkc_top"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def tree_params(self) -> TreeParams:
        return TreeParams(self.cp, self.min_split, self.min_bucket, self.max_depth)

    def train_spec(self) -> TrainSpec:
        return TrainSpec(
            negative_ratio=self.negative_ratio,
            seed=self.seed,
            tree=self.tree_params(),
            lr_cost=self.lr_cost,
            lr_top=self.lr_top,
            lr_feature_mode=self.lr_feature_mode,
        )

    def delimiters(self) -> tuple[str, str]:
        return (self.mention_open, self.mention_close)

    def kb_path(self, kind: str) -> Path:
        path = self.profession_kb if kind == "profession" else self.nationality_kb
        if path is None:
            raise DataFormatError(f"no knowledge-base path configured for {kind}")
        return path

    def train_path(self, kind: str) -> Path:
        path = self.profession_train if kind == "profession" else self.nationality_train
        if path is None:
            raise DataFormatError(f"no training-file path configured for {kind}")
        return path

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise DataFormatError(f"missing required path option(s): {', '.join(missing)}")

    @classmethod
    def from_sources(
        cls, file_values: Mapping[str, Any] | None, flag_values: Mapping[str, Any]
    ) -> "PipelineConfig":
        """Merge config-file values and CLI flag values; flags win."""
        path_fields = {
            "sentences",
            "persons",
            "stopwords",
            "profession_kb",
            "profession_train",
            "nationality_kb",
            "nationality_train",
            "cache_dir",
            "out_dir",
        }
        merged: dict[str, Any] = {}
        known = {f.name for f in fields(cls)}
        for source in (file_values or {}), flag_values:
            for key, value in source.items():
                if value is None:
                    continue
                if key not in known:
                    raise DataFormatError(f"unknown configuration key {key!r}")
                if key == "kinds" and not isinstance(value, tuple):
                    value = tuple(value)
                if key in path_fields:
                    value = Path(value)
                merged[key] = value
        return cls(**merged)


@dataclass
class BuiltStores:
    """Corpus-derived state shared by predict, evaluate, and analyze."""

    build: DocBuildResult
    stats: CorpusTermStats
    kbs: dict[str, KnowledgeBase]
    rankings: dict[str, dict[str, KeywordRanking]] = field(default_factory=dict)

    @property
    def docs(self):
        return self.build.store


def _corpus_params(config: PipelineConfig) -> dict[str, Any]:
    return {
        "delimiters": list(config.delimiters()),
        "kinds": list(config.kinds),
        "keyword_top": config.keyword_top,
        "idf_count_mode": config.idf_count_mode,
    }


def load_kbs(config: PipelineConfig) -> dict[str, KnowledgeBase]:
    return {kind: load_kb(config.kb_path(kind), kind) for kind in config.kinds}


def _read_sentences(path: Path) -> Iterable[str]:
    with open(path, encoding="utf-8") as fh:
        yield from fh


def build_stores(config: PipelineConfig, use_cache: bool = True) -> tuple[BuiltStores, bool]:
    """Load inputs and build (or reload) docs, stats, and keyword rankings.

    Returns the stores and whether they came from a valid cache.
    """
    config.require("sentences", "persons", "stopwords")
    kbs = load_kbs(config)
    input_paths = [config.sentences, config.persons, config.stopwords]
    input_paths += [config.kb_path(kind) for kind in config.kinds]
    stamp = cache.content_stamp(input_paths, _corpus_params(config))
    cache_path = config.cache_dir / "stores.bin"

    if use_cache:
        cached = cache.load(cache_path, stamp)
        if cached is not None:
            build, stats, rankings = cached
            log.info("loaded cached stores from %s", cache_path)
            return BuiltStores(build, stats, kbs, rankings), True

    person_names = {ref.name for ref in load_persons(config.persons)}
    stopword_set = StopwordSet.from_file(config.stopwords)
    phrase_targets: dict[str, list[str]] = {}
    for kb in kbs.values():
        for person, labels in kb.entries.items():
            phrase_targets.setdefault(person, []).extend(labels)

    build = build_person_docs(
        _read_sentences(config.sentences),
        person_names,
        stopword_set,
        phrase_targets=phrase_targets,
        delimiters=config.delimiters(),
        strict=config.strict,
    )
    log.info(
        "processed %d corpus lines (%d linked, %d parse failures)",
        build.lines_processed,
        build.linked_line_count,
        build.parse_failure_count,
    )
    if (
        config.max_parse_failures is not None
        and build.parse_failure_count > config.max_parse_failures
    ):
        raise DataFormatError(
            f"{build.parse_failure_count} malformed sentence lines exceed the "
            f"allowed {config.max_parse_failures}"
        )

    stats = CorpusTermStats(build.term_totals, build.term_sentence_counts)
    rankings = {
        kind: keywords.rank_all(
            kbs[kind], build.store, stats, config.keyword_top, config.idf_count_mode
        )
        for kind in config.kinds
    }
    cache.save(cache_path, stamp, (build, stats, rankings))
    return BuiltStores(build, stats, kbs, rankings), False


def make_context(stores: BuiltStores, kind: str, config: PipelineConfig) -> FeatureContext:
    kb = stores.kbs[kind]
    models = train_label_models(
        kb,
        stores.docs,
        stores.rankings[kind],
        keywords.positive_examples(kb),
        config.train_spec(),
    )
    return FeatureContext(
        kb,
        stores.docs,
        stores.rankings[kind],
        models,
        wkc_top=config.wkc_top,
        wkc_mode=config.wkc_mode,
        lr_feature_mode=config.lr_feature_mode,
    )


def triple_rows(
    context: FeatureContext, triples: Sequence[ScoredTriple]
) -> list[tuple[FeatureVector, int]]:
    return [(context.vector(t.person, t.label), t.score) for t in triples]


def fit_tree_on_triples(
    context: FeatureContext,
    triples: Sequence[ScoredTriple],
    config: PipelineConfig,
    condition: str | None = None,
) -> RegressionTree:
    condition = condition or config.condition
    rows = triple_rows(context, triples)
    X = feature_matrix([fv for fv, _ in rows], condition)
    y = np.asarray([score for _, score in rows], dtype=float)
    return fit_regression_tree(
        X, y, config.tree_params(), features.condition_feature_names(condition)
    )


def predict_kind(
    context: FeatureContext,
    tree: RegressionTree,
    condition: str = "full",
) -> list[tuple[str, str, int]]:
    """Score every multi-candidate (person, label) pair, sorted."""
    out: list[tuple[str, str, int]] = []
    for person in sorted(context.kb.entries):
        candidates = context.kb.candidates(person)
        if len(candidates) < 2:
            continue
        vectors = context.vectors_for_person(person)
        for label in sorted(candidates):
            row = feature_matrix([vectors[label]], condition)[0]
            out.append((person, label, finalize_score(tree.predict(row))))
    return out


def write_reference(rows: Iterable[tuple[str, str, int]], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for person, label, score in rows:
            fh.write(f"{person}\t{label}\t{score}\n")


def read_reference(paths: Iterable[Path]) -> dict[tuple[str, str], int]:
    """Load reference files into one lookup; an empty file is allowed."""
    lookup: dict[tuple[str, str], int] = {}
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                fields = raw.rstrip("\n").split("\t")
                if len(fields) != 3 or not fields[0] or not fields[1]:
                    raise DataFormatError(
                        f"{path}: line {line_no}: expected person<TAB>label<TAB>score"
                    )
                try:
                    score = int(fields[2])
                except ValueError:
                    raise DataFormatError(
                        f"{path}: line {line_no}: non-integer score {fields[2]!r}"
                    ) from None
                if not 0 <= score <= 7:
                    raise DataFormatError(
                        f"{path}: line {line_no}: score {score} outside 0..7"
                    )
                key = (fields[0], fields[1])
                if key in lookup and lookup[key] != score:
                    log.warning("conflicting reference score for %s / %s", *key)
                lookup[key] = score
    return lookup


def evaluate_kind(
    stores: BuiltStores,
    kind: str,
    config: PipelineConfig,
    conditions: Sequence[str] = ("rel", "full"),
) -> dict[str, MetricReport]:
    """Cross-validate the kind's training triples under each condition."""
    triples = load_scored(config.train_path(kind))
    context = make_context(stores, kind, config)
    reports: dict[str, MetricReport] = {}
    for condition in conditions:
        def fit_predict(
            train: Sequence[ScoredTriple],
            test: Sequence[ScoredTriple],
            condition: str = condition,
        ):
            tree = fit_tree_on_triples(context, train, config, condition)
            rows = feature_matrix(
                [context.vector(t.person, t.label) for t in test], condition
            )
            return [finalize_score(tree.predict(row)) for row in rows]

        reports[condition] = metrics.kfold_cv(
            triples,
            fit_predict,
            k=config.folds,
            seed=config.seed,
            group_by_person=config.group_folds_by_person,
            tie_mode=config.tie_mode,
        )
    return reports

"""Relevance scoring for person-profession and person-nationality triples."""

from importlib import resources
from pathlib import Path

from .corpus import (
    KnowledgeBase,
    PersonDoc,
    PersonDocStore,
    PersonRef,
    ScoredTriple,
    build_person_docs,
    count_phrase_occurrences,
    load_kb,
    load_labels,
    load_persons,
    load_scored,
    parse_sentence_line,
)
from .features import FEATURE_NAMES, FeatureContext, FeatureVector
from .keywords import CorpusTermStats, KeywordRanking, positive_examples, rank_keywords
from .learn import TrainSpec, finalize_score, sample_negatives
from .logistic import LogisticModel, train_logistic
from .metrics import MetricReport, accuracy_at_2, asd, discrepancy, kendall_tau_distance, kfold_cv
from .pipeline import PipelineConfig
from .stats import CorrelationResult, pearson
from .textprep import StopwordSet, tokenize
from .tree import RegressionTree, TreeParams, fit_regression_tree

__version__ = "0.1.0"


def fixture_dir() -> Path:
    """Directory of the bundled synthetic dataset used by tests and docs."""
    return Path(resources.files(__package__) / "fixtures")


__all__ = [
    "CorpusTermStats",
    "CorrelationResult",
    "FEATURE_NAMES",
    "FeatureContext",
    "FeatureVector",
    "KeywordRanking",
    "KnowledgeBase",
    "LogisticModel",
    "MetricReport",
    "PersonDoc",
    "PersonDocStore",
    "PersonRef",
    "PipelineConfig",
    "RegressionTree",
    "ScoredTriple",
    "StopwordSet",
    "TrainSpec",
    "TreeParams",
    "accuracy_at_2",
    "asd",
    "build_person_docs",
    "count_phrase_occurrences",
    "discrepancy",
    "finalize_score",
    "fit_regression_tree",
    "fixture_dir",
    "kendall_tau_distance",
    "kfold_cv",
    "load_kb",
    "load_labels",
    "load_persons",
    "load_scored",
    "parse_sentence_line",
    "pearson",
    "positive_examples",
    "rank_keywords",
    "sample_negatives",
    "tokenize",
    "train_logistic",
    "__version__",
]

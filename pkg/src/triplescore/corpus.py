"""Input-file parsing and streaming aggregation of per-person documents.

Five file kinds are handled here:

* knowledge base:  ``person<TAB>label`` lines, one relation kind per file
* scored triples:  ``person<TAB>label<TAB>score`` lines, integer scores 0..7
* persons:         ``person<TAB>freebase_id`` lines (id may be empty)
* label list:      one label per line
* sentence corpus: one sentence per line, person mentions in brackets

``build_person_docs`` makes a single pass over the sentence stream and keeps
per-person term counts, not raw text, so memory is proportional to
persons x retained vocabulary rather than to corpus size.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DataFormatError, SentenceParseError
from .textprep import StopwordSet, tokenize

log = logging.getLogger(__name__)

DEFAULT_DELIMITERS = ("[", "]")

# Bounds on diagnostics retained during a corpus pass; totals are exact.
_MAX_RECORDED_FAILURES = 20
_MAX_UNKNOWN_SAMPLES = 10


@dataclass(frozen=True)
class PersonRef:
    """One row of the persons file."""

    name: str
    freebase_id: str = ""


@dataclass(frozen=True)
class ScoredTriple:
    """A (person, label) pair with its crowdsourced relevance score."""

    person: str
    label: str
    score: int


class KnowledgeBase:
    """Person -> ordered candidate labels for one relation kind.

    Immutable after construction; safe to share between threads.
    """

    def __init__(self, kind: str, entries: dict[str, list[str]]):
        self.kind = kind
        self.entries = entries
        self._label_counts: Counter[str] | None = None

    def candidates(self, person: str) -> tuple[str, ...]:
        return tuple(self.entries.get(person, ()))

    def candidate_count(self, person: str) -> int:
        return len(self.entries.get(person, ()))

    def familiarity(self, label: str) -> int:
        """Number of persons whose candidate set contains *label*."""
        return self.label_counts().get(label, 0)

    def label_counts(self) -> Counter[str]:
        if self._label_counts is None:
            counts: Counter[str] = Counter()
            for labels in self.entries.values():
                counts.update(labels)
            self._label_counts = counts
        return self._label_counts

    def labels(self) -> list[str]:
        return sorted(self.label_counts())

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, person: str) -> bool:
        return person in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)


def count_phrase_occurrences(text: str, phrase: str) -> int:
    """Case-insensitive, non-overlapping count of *phrase* in *text*."""
    if not phrase:
        raise ValueError("phrase must be non-empty")
    return text.casefold().count(phrase.casefold())


def parse_sentence_line(
    line: str,
    delimiters: tuple[str, str] = DEFAULT_DELIMITERS,
    line_no: int | None = None,
) -> tuple[str, list[str]]:
    """Split one corpus sentence into clean text and its person mentions.

    Returns the line with every delimiter pair removed (mention text kept in
    place) and the bracketed names in order of appearance, duplicates
    included. Unbalanced or nested delimiters raise SentenceParseError.
    """
    opener, closer = delimiters
    if not opener or not closer or opener == closer:
        raise ValueError("mention delimiters must be distinct and non-empty")

    clean_parts: list[str] = []
    mentions: list[str] = []
    pos = 0
    while True:
        i = line.find(opener, pos)
        j = line.find(closer, pos)
        if i == -1 and j == -1:
            clean_parts.append(line[pos:])
            break
        if j != -1 and (i == -1 or j < i):
            raise SentenceParseError(
                f"closing {closer!r} without a preceding {opener!r}", line_no
            )
        end = line.find(closer, i + len(opener))
        if end == -1:
            raise SentenceParseError(f"unclosed {opener!r}", line_no)
        nested = line.find(opener, i + len(opener))
        if nested != -1 and nested < end:
            raise SentenceParseError(f"nested {opener!r} inside a mention", line_no)
        clean_parts.append(line[pos:i])
        name = line[i + len(opener) : end]
        clean_parts.append(name)
        if name:
            mentions.append(name)
        pos = end + len(closer)
    return "".join(clean_parts), mentions


def _read_tsv(path: str | Path, n_fields: int) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            fields = raw.rstrip("\n").split("\t")
            if len(fields) != n_fields:
                raise DataFormatError(
                    f"{path}: line {line_no}: expected {n_fields} tab-separated "
                    f"fields, got {len(fields)}"
                )
            yield line_no, fields


def load_kb(path: str | Path, kind: str) -> KnowledgeBase:
    """Load a ``person<TAB>label`` file, grouping labels by person.

    Label order within a person follows file order; duplicate (person, label)
    lines are dropped with a debug log. An empty file is an error.
    """
    entries: dict[str, list[str]] = {}
    seen: set[tuple[str, str]] = set()
    for line_no, (person, label) in _read_tsv(path, 2):
        if not person or not label:
            raise DataFormatError(f"{path}: line {line_no}: empty person or label")
        if (person, label) in seen:
            log.debug("%s: line %d: duplicate pair (%s, %s)", path, line_no, person, label)
            continue
        seen.add((person, label))
        entries.setdefault(person, []).append(label)
    if not entries:
        raise DataFormatError(f"{path}: empty knowledge base")
    return KnowledgeBase(kind, entries)


def serialize_kb(kb: KnowledgeBase, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for person, labels in kb.entries.items():
            for label in labels:
                fh.write(f"{person}\t{label}\n")


def load_scored(path: str | Path) -> list[ScoredTriple]:
    """Load ``person<TAB>label<TAB>score`` triples in file order."""
    triples: list[ScoredTriple] = []
    for line_no, (person, label, raw_score) in _read_tsv(path, 3):
        if not person or not label:
            raise DataFormatError(f"{path}: line {line_no}: empty person or label")
        try:
            score = int(raw_score)
        except ValueError:
            raise DataFormatError(
                f"{path}: line {line_no}: non-integer score {raw_score!r}"
            ) from None
        if not 0 <= score <= 7:
            raise DataFormatError(
                f"{path}: line {line_no}: score {score} outside 0..7"
            )
        triples.append(ScoredTriple(person, label, score))
    if not triples:
        raise DataFormatError(f"{path}: empty training file")
    return triples


def load_persons(path: str | Path) -> list[PersonRef]:
    """Load the persons file; names must be non-empty and unique."""
    refs: list[PersonRef] = []
    seen: set[str] = set()
    for line_no, (name, freebase_id) in _read_tsv(path, 2):
        if not name:
            raise DataFormatError(f"{path}: line {line_no}: empty person name")
        if name in seen:
            raise DataFormatError(f"{path}: line {line_no}: duplicate person {name!r}")
        seen.add(name)
        refs.append(PersonRef(name, freebase_id))
    if not refs:
        raise DataFormatError(f"{path}: empty persons file")
    return refs


def load_labels(path: str | Path) -> list[str]:
    """Load a one-label-per-line list; labels must be non-empty and unique."""
    labels: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            label = raw.rstrip("\n")
            if not label:
                raise DataFormatError(f"{path}: line {line_no}: empty label")
            if label in seen:
                raise DataFormatError(f"{path}: line {line_no}: duplicate label {label!r}")
            seen.add(label)
            labels.append(label)
    if not labels:
        raise DataFormatError(f"{path}: empty label file")
    return labels


@dataclass
class PersonDoc:
    """Streaming aggregate of every corpus line linked to one person.

    ``term_counts`` aggregates the preprocessed terms of all linked lines;
    ``phrase_counts`` holds case-folded label-phrase occurrence counts
    accumulated line by line (equivalent to scanning the newline-joined
    clean text). ``mention_count`` is the number of linked lines: a line
    mentioning the person several times counts once.
    """

    person: str
    mention_count: int = 0
    term_counts: Counter[str] = field(default_factory=Counter)
    phrase_counts: dict[str, int] = field(default_factory=dict)

    def merge(self, other: "PersonDoc") -> None:
        self.mention_count += other.mention_count
        self.term_counts.update(other.term_counts)
        for phrase, count in other.phrase_counts.items():
            self.phrase_counts[phrase] = self.phrase_counts.get(phrase, 0) + count


class PersonDocStore:
    """Immutable-by-convention mapping person -> PersonDoc."""

    def __init__(self, docs: dict[str, PersonDoc] | None = None):
        self.docs = docs or {}

    def get(self, person: str) -> PersonDoc | None:
        return self.docs.get(person)

    def popularity(self, person: str) -> int:
        doc = self.docs.get(person)
        return doc.mention_count if doc else 0

    def term_count(self, person: str, term: str) -> int:
        doc = self.docs.get(person)
        return doc.term_counts.get(term, 0) if doc else 0

    def __len__(self) -> int:
        return len(self.docs)

    def __contains__(self, person: str) -> bool:
        return person in self.docs

    def __iter__(self) -> Iterator[str]:
        return iter(self.docs)


@dataclass
class DocBuildResult:
    """Everything produced by one pass over the sentence corpus.

    ``merge`` is associative and commutative, so line shards may be
    aggregated independently and combined in any order.
    """

    store: PersonDocStore = field(default_factory=PersonDocStore)
    term_totals: Counter[str] = field(default_factory=Counter)
    term_sentence_counts: Counter[str] = field(default_factory=Counter)
    lines_processed: int = 0
    linked_line_count: int = 0
    parse_failure_count: int = 0
    parse_failures: list[str] = field(default_factory=list)
    unknown_mention_count: int = 0
    unknown_mention_samples: list[str] = field(default_factory=list)

    def merge(self, other: "DocBuildResult") -> "DocBuildResult":
        for person, doc in other.store.docs.items():
            mine = self.store.docs.get(person)
            if mine is None:
                self.store.docs[person] = doc
            else:
                mine.merge(doc)
        self.term_totals.update(other.term_totals)
        self.term_sentence_counts.update(other.term_sentence_counts)
        self.lines_processed += other.lines_processed
        self.linked_line_count += other.linked_line_count
        self.parse_failure_count += other.parse_failure_count
        self.parse_failures = (self.parse_failures + other.parse_failures)[
            :_MAX_RECORDED_FAILURES
        ]
        self.unknown_mention_count += other.unknown_mention_count
        for name in other.unknown_mention_samples:
            if (
                len(self.unknown_mention_samples) < _MAX_UNKNOWN_SAMPLES
                and name not in self.unknown_mention_samples
            ):
                self.unknown_mention_samples.append(name)
        return self


def build_person_docs(
    lines: Iterable[str],
    persons: set[str],
    stopwords: StopwordSet,
    phrase_targets: Mapping[str, Iterable[str]] | None = None,
    delimiters: tuple[str, str] = DEFAULT_DELIMITERS,
    strict: bool = False,
) -> DocBuildResult:
    """Aggregate the sentence stream into per-person documents, one pass.

    Every line contributes to the corpus-wide term statistics; lines with at
    least one known mention additionally contribute their terms to each
    mentioned person's document (a multi-person line feeds every mentioned
    person). Mentions not in *persons* are counted and reported but do not
    stop the line from linking to its known persons.

    *phrase_targets* maps a person to the label phrases whose exact-count
    should be accumulated for that person (normally the person's candidate
    labels); counting is case-folded and non-overlapping per line.

    With ``strict=False`` a malformed line is skipped and counted; with
    ``strict=True`` it raises SentenceParseError with its line number.
    """
    result = DocBuildResult()
    docs = result.store.docs

    folded_targets: dict[str, tuple[str, ...]] = {}
    if phrase_targets:
        for person, labels in phrase_targets.items():
            folded = tuple(dict.fromkeys(lb.casefold() for lb in labels if lb))
            if folded:
                folded_targets[person] = folded

    for line_no, raw in enumerate(lines, start=1):
        result.lines_processed += 1
        line = raw.rstrip("\n")
        try:
            clean, mentions = parse_sentence_line(line, delimiters, line_no)
        except SentenceParseError as exc:
            if strict:
                raise
            result.parse_failure_count += 1
            if len(result.parse_failures) < _MAX_RECORDED_FAILURES:
                result.parse_failures.append(str(exc))
            continue

        tokens = tokenize(clean, stopwords)
        result.term_totals.update(tokens)
        result.term_sentence_counts.update(set(tokens))

        if not mentions:
            continue
        known: list[str] = []
        for name in dict.fromkeys(mentions):
            if name in persons:
                known.append(name)
            else:
                result.unknown_mention_count += 1
                if (
                    len(result.unknown_mention_samples) < _MAX_UNKNOWN_SAMPLES
                    and name not in result.unknown_mention_samples
                ):
                    result.unknown_mention_samples.append(name)
        if not known:
            continue
        result.linked_line_count += 1

        folded_line: str | None = None
        for person in known:
            doc = docs.get(person)
            if doc is None:
                doc = docs[person] = PersonDoc(person)
            doc.mention_count += 1
            doc.term_counts.update(tokens)
            targets = folded_targets.get(person)
            if targets:
                if folded_line is None:
                    folded_line = clean.casefold()
                for phrase in targets:
                    doc.phrase_counts[phrase] = doc.phrase_counts.get(
                        phrase, 0
                    ) + folded_line.count(phrase)

    if result.unknown_mention_count:
        log.warning(
            "%d mention(s) of unknown persons (e.g. %s)",
            result.unknown_mention_count,
            ", ".join(result.unknown_mention_samples[:3]),
        )
    if result.parse_failure_count:
        log.warning(
            "%d malformed sentence line(s) skipped", result.parse_failure_count
        )
    return result

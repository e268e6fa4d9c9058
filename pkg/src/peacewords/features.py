"""Word-frequency tables, top-k selection, union vocabulary and feature matrices."""
from __future__ import annotations

import csv
import hashlib
import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

NORMALIZATIONS = ("raw_count", "per_million")
DEFAULT_K = 300


@dataclass
class FreqTable:
    country: str
    counts: dict[str, int]
    total_words: int

    def __post_init__(self):
        if self.total_words <= 0:
            raise DataError(f"{self.country}: total_words must be positive")
        if any(c < 1 for c in self.counts.values()):
            raise DataError(f"{self.country}: counts must be >= 1")
        if sum(self.counts.values()) > self.total_words:
            raise DataError(f"{self.country}: counts exceed total_words")

    def merge(self, other: "FreqTable") -> "FreqTable":
        if other.country != self.country:
            raise DataError(f"cannot merge {self.country} with {other.country}")
        counts = Counter(self.counts)
        counts.update(other.counts)
        return FreqTable(self.country, dict(counts), self.total_words + other.total_words)

    def sorted_items(self) -> list[tuple[str, int]]:
        """(word, count) by count descending, then word ascending."""
        return sorted(self.counts.items(), key=lambda wc: (-wc[1], wc[0]))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["word", "count"])
            w.writerows(self.sorted_items())

    @classmethod
    def from_csv(cls, path: str | Path, country: str, total_words: int | None = None) -> "FreqTable":
        """Load a ``word,count`` table; total defaults to the sum of counts."""
        counts = {}
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["word", "count"]:
                raise DataError(f"{path}: expected header word,count")
            for row in reader:
                if row:
                    counts[row[0]] = int(row[1])
        return cls(country, counts, total_words if total_words is not None else sum(counts.values()))


def count_words(country: str, lemmas: Iterable[str] | Iterable[Sequence[str]]) -> FreqTable:
    """Count lemmas for one country.

    Accepts a flat lemma list or a list of per-article lemma lists.
    """
    counts: Counter[str] = Counter()
    total = 0
    for item in lemmas:
        if isinstance(item, str):
            counts[item] += 1
            total += 1
        else:
            counts.update(item)
            total += len(item)
    if total == 0:
        raise DataError(f"{country}: no words to count")
    return FreqTable(country, dict(counts), total)


def top_k(table: FreqTable, k: int = DEFAULT_K) -> list[str]:
    """The k most frequent words; ties go to the lexicographically smaller word."""
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    items = table.sorted_items()
    if len(items) < k:
        warnings.warn(f"{table.country}: only {len(items)} distinct words, fewer than k={k}", stacklevel=2)
    return [w for w, _ in items[:k]]


@dataclass(frozen=True)
class Vocabulary:
    words: tuple[str, ...]
    provenance: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise DataError("vocabulary has duplicate words")

    def __len__(self) -> int:
        return len(self.words)

    def index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.words).encode("utf-8")).hexdigest()


def build_vocabulary(topk_lists: Mapping[str, Sequence[str]] | Sequence[Sequence[str]]) -> Vocabulary:
    """Sorted union of per-country top-k lists, with which countries contributed each word."""
    if isinstance(topk_lists, Mapping):
        named = dict(topk_lists)
    else:
        named = {str(i): lst for i, lst in enumerate(topk_lists)}
    if not named:
        raise DataError("need at least one top-k list")
    prov: dict[str, set[str]] = {}
    for country, words in named.items():
        for w in words:
            prov.setdefault(w, set()).add(country)
    words = tuple(sorted(prov))
    return Vocabulary(words, {w: frozenset(prov[w]) for w in words})


@dataclass
class FeatureMatrix:
    vocab: Vocabulary
    countries: list[str]
    values: np.ndarray
    normalization: str
    labels: dict[str, int] | None = None

    def __post_init__(self):
        if self.values.shape != (len(self.countries), len(self.vocab)):
            raise DataError(f"matrix shape {self.values.shape} does not match "
                            f"{len(self.countries)} countries x {len(self.vocab)} words")
        if np.any(self.values < 0):
            raise DataError("feature values must be non-negative")

    def row(self, country: str) -> np.ndarray:
        return self.values[self.countries.index(country)]

    def subset(self, countries: Sequence[str]) -> "FeatureMatrix":
        idx = [self.countries.index(c) for c in countries]
        labels = None if self.labels is None else {c: self.labels[c] for c in countries if c in self.labels}
        return FeatureMatrix(self.vocab, list(countries), self.values[idx], self.normalization, labels)

    def to_csv(self, path: str | Path) -> None:
        """Write the matrix with a ``<path>.meta.json`` sidecar recording normalization."""
        path = Path(path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["country", *self.vocab.words])
            for c, row in zip(self.countries, self.values):
                w.writerow([c, *(repr(float(v)) for v in row)])
        meta = {
            "normalization": self.normalization,
            "vocabulary_size": len(self.vocab),
            "vocabulary_sha256": self.vocab.digest(),
        }
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureMatrix":
        path = Path(path)
        meta = json.loads(Path(str(path) + ".meta.json").read_text())
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            countries, rows = [], []
            for row in reader:
                if row:
                    countries.append(row[0])
                    rows.append([float(v) for v in row[1:]])
        vocab = Vocabulary(tuple(header[1:]))
        if vocab.digest() != meta["vocabulary_sha256"]:
            raise DataError(f"{path}: vocabulary does not match its metadata")
        values = np.array(rows, dtype=float).reshape(len(countries), len(vocab))
        return cls(vocab, countries, values, meta["normalization"])


def featurize(
    tables: Sequence[FreqTable],
    vocab: Vocabulary,
    normalization: str = "per_million",
) -> FeatureMatrix:
    """Align each country's counts to the vocabulary.

    ``per_million`` gives 1e6 * count / total_words; words a country never
    uses get 0.
    """
    if normalization not in NORMALIZATIONS:
        raise DataError(f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}")
    countries = [t.country for t in tables]
    if len(set(countries)) != len(countries):
        raise DataError("duplicate country among frequency tables")
    values = np.zeros((len(tables), len(vocab)))
    for i, t in enumerate(tables):
        counts = np.array([t.counts.get(w, 0) for w in vocab.words], dtype=float)
        values[i] = counts if normalization == "raw_count" else 1e6 * counts / t.total_words
    return FeatureMatrix(vocab, countries, values, normalization)

"""Machine-learning peace index, country ranking, and word-importance reports."""
from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError
from .features import FreqTable, Vocabulary
from .indices import INDEX_NAMES, CountryClass
from .learners import LRModel, predict_proba

THRESHOLD = 0.5
DEFAULT_TOP_N = 100
DEFAULT_FLAG_N = 50


@dataclass(frozen=True)
class PeaceScore:
    country: str
    p: float
    index: float
    classified_as: CountryClass


def ml_peace_index(model: LRModel, row, country: str = "") -> PeaceScore:
    """Score one feature row as 100 times the probability of the higher-peace class."""
    if not isinstance(model, LRModel) or model.classes != (CountryClass.LOWER, CountryClass.HIGHER):
        raise DataError("peace index needs a logistic model trained on classes {0, 1} only")
    p = predict_proba(model, np.asarray(row, dtype=float))
    cls = CountryClass.HIGHER if p >= THRESHOLD else CountryClass.LOWER
    return PeaceScore(country, p, 100.0 * p, cls)


@dataclass(frozen=True)
class RankRow:
    rank: int
    country: str
    ml_index: float
    reference: Mapping[str, float]


def rank_countries(scores: Sequence[PeaceScore], reference: Mapping[str, Mapping[str, float]] | None = None) -> list[RankRow]:
    """Order by ascending index (ties by country code) with the scaled reference indices alongside."""
    reference = reference or {}
    ordered = sorted(scores, key=lambda s: (s.index, s.country))
    return [RankRow(i, s.country, s.index, dict(reference.get(s.country, {}))) for i, s in enumerate(ordered, 1)]


def write_ranking_csv(path: str | Path, rows: Sequence[RankRow], names=INDEX_NAMES) -> None:
    """Two-decimal table plus a ``.full.json`` sidecar with unrounded values."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "country", "ml_index", *names])
        for r in rows:
            w.writerow([r.rank, r.country, f"{r.ml_index:.2f}",
                        *(f"{r.reference[n]:.2f}" if n in r.reference else "" for n in names)])
    full = [{"rank": r.rank, "country": r.country, "ml_index": r.ml_index, **r.reference} for r in rows]
    Path(str(path) + ".full.json").write_text(json.dumps(full, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class WordReportRow:
    word: str
    count: int
    rank: int
    important: bool


def important_words(importance, vocab: Vocabulary, flag_n: int = DEFAULT_FLAG_N) -> set[str]:
    """The ``flag_n`` highest-importance words with non-zero importance; ties by word."""
    importance = np.asarray(importance, dtype=float)
    if len(importance) != len(vocab):
        raise DataError(f"importance has {len(importance)} entries but vocabulary has {len(vocab)} words")
    ranked = sorted((i for i in range(len(vocab)) if importance[i] > 0),
                    key=lambda i: (-importance[i], vocab.words[i]))
    return {vocab.words[i] for i in ranked[:flag_n]}


def word_report(
    tables_by_class: Mapping[int, Sequence[FreqTable]],
    importance,
    vocab: Vocabulary,
    top_n: int = DEFAULT_TOP_N,
    flag_n: int = DEFAULT_FLAG_N,
) -> dict[int, list[WordReportRow]]:
    """Most frequent vocabulary words per class, pooled over that class's countries.

    Counts are raw occurrences. The importance flag is global: the same words
    are flagged in every class table.
    """
    flagged = important_words(importance, vocab, flag_n)
    in_vocab = set(vocab.words)
    out = {}
    for cls, tables in tables_by_class.items():
        pooled: Counter[str] = Counter()
        for t in tables:
            pooled.update({w: c for w, c in t.counts.items() if w in in_vocab})
        top = sorted(pooled.items(), key=lambda wc: (-wc[1], wc[0]))[:top_n]
        out[cls] = [WordReportRow(w, c, r, w in flagged) for r, (w, c) in enumerate(top, 1)]
    return out


def _class_name(cls) -> str:
    try:
        return CountryClass(int(cls)).name.lower()
    except ValueError:
        return str(cls)


def write_word_report_csv(path: str | Path, report: Mapping[int, Sequence[WordReportRow]], meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "rank", "word", "count", "important"])
        for cls, rows in report.items():
            for r in rows:
                w.writerow([_class_name(cls), r.rank, r.word, r.count, int(r.important)])
    if meta is not None:
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


WORDCLOUD_HEADER = ["word", "frequency", "class", "important"]


def wordcloud_export(path: str | Path, report: Mapping[int, Sequence[WordReportRow]], important_only: bool = True) -> int:
    """Write renderer-ready rows (size ~ frequency); returns the number of rows."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(WORDCLOUD_HEADER)
        for cls, rows in report.items():
            for r in rows:
                if important_only and not r.important:
                    continue
                w.writerow([r.word, r.count, _class_name(cls), int(r.important)])
                n += 1
    return n


def read_wordcloud(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != WORDCLOUD_HEADER:
            raise DataError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            {"word": r["word"], "frequency": int(r["frequency"]), "class": r["class"], "important": r["important"] == "1"}
            for r in reader
        ]


def score_rows(model: LRModel, countries: Sequence[str], X) -> list[PeaceScore]:
    X = np.asarray(X, dtype=float)
    return [ml_peace_index(model, x, c) for c, x in zip(countries, X)]


__all__ = [
    "PeaceScore", "RankRow", "WordReportRow", "ml_peace_index", "rank_countries", "score_rows",
    "word_report", "important_words", "wordcloud_export", "read_wordcloud",
    "write_ranking_csv", "write_word_report_csv",
]

"""Country-labeled article corpus: manifest loading, streaming, statistics.

A corpus is a manifest file with one ``country<TAB>path`` entry per line,
where each path is a JSON Lines file of articles.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .errors import DataError

log = logging.getLogger(__name__)

ARTICLE_KEYS = frozenset({"country", "text", "source", "date"})
DEFAULT_MIN_ARTICLES = 1000


@dataclass(frozen=True)
class Article:
    country: str
    text: str
    source: str | None = None
    date: str | None = None

    def __post_init__(self):
        if not self.country:
            raise DataError("article has an empty country")
        if not self.text.strip():
            raise DataError(f"article for {self.country!r} has empty text")


@dataclass(frozen=True)
class ManifestEntry:
    country: str
    path: Path
    n_articles: int


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry]
    countries: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.countries:
            seen: dict[str, None] = {}
            for e in self.entries:
                seen.setdefault(e.country, None)
            self.countries = list(seen)
        pairs = set()
        for e in self.entries:
            key = (e.country, str(e.path))
            if key in pairs:
                raise DataError(f"duplicate manifest entry: {e.country}\t{e.path}")
            pairs.add(key)

    def entries_for(self, country: str) -> list[ManifestEntry]:
        if country not in self.countries:
            raise DataError(f"unknown country {country!r}")
        return [e for e in self.entries if e.country == country]

    def article_count(self, country: str) -> int:
        return sum(e.n_articles for e in self.entries_for(country))

    def restrict(self, countries: Sequence[str]) -> "CorpusManifest":
        keep = [c for c in self.countries if c in set(countries)]
        return CorpusManifest([e for e in self.entries if e.country in keep], keep)


def _count_lines(path: Path) -> int:
    with open(path, encoding="utf-8") as fh:
        return sum(1 for line in fh if line.strip())


def load_manifest(path: str | Path) -> CorpusManifest:
    """Read a ``country<TAB>path`` manifest.

    Relative article paths resolve against the manifest's directory. Blank
    lines and lines starting with ``#`` are ignored.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise DataError(f"{path}:{lineno}: malformed manifest line, expected country<TAB>path")
            country, rel = parts[0].strip(), parts[1].strip()
            if (country, rel) in seen:
                raise DataError(f"{path}:{lineno}: duplicate entry {country}\t{rel}")
            seen.add((country, rel))
            article_path = Path(rel)
            if not article_path.is_absolute():
                article_path = path.parent / article_path
            if not article_path.is_file():
                raise DataError(f"{path}:{lineno}: article file not found: {article_path}")
            entries.append(ManifestEntry(country, article_path, _count_lines(article_path)))
    if not entries:
        raise DataError("empty manifest")
    return CorpusManifest(entries)


def _parse_article(line: str, path: Path, lineno: int, country: str) -> Article:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise DataError(f"{path}:{lineno}: expected a JSON object")
    unknown = set(obj) - ARTICLE_KEYS
    if unknown:
        raise DataError(f"{path}:{lineno}: unknown fields {sorted(unknown)}")
    if obj.get("country") != country:
        raise DataError(f"{path}:{lineno}: country {obj.get('country')!r} does not match manifest {country!r}")
    text = obj.get("text")
    if not isinstance(text, str):
        raise DataError(f"{path}:{lineno}: missing text")
    try:
        return Article(country, text, obj.get("source"), obj.get("date"))
    except DataError as exc:
        raise DataError(f"{path}:{lineno}: {exc}") from exc


def stream_articles(manifest: CorpusManifest, country: str) -> Iterator[Article]:
    """Yield a country's articles in manifest order, then file order."""
    for entry in manifest.entries_for(country):
        try:
            fh = open(entry.path, encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read {entry.path}: {exc}") from exc
        with fh:
            try:
                for lineno, line in enumerate(fh, 1):
                    if line.strip():
                        yield _parse_article(line, entry.path, lineno, country)
            except (OSError, UnicodeDecodeError) as exc:
                raise DataError(f"error reading {entry.path}: {exc}") from exc


def write_articles(path: str | Path, articles: Sequence[Article]) -> None:
    """Write articles as JSON Lines, omitting unset optional fields."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for a in articles:
            obj = {"country": a.country, "text": a.text}
            if a.source is not None:
                obj["source"] = a.source
            if a.date is not None:
                obj["date"] = a.date
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def sufficient_countries(manifest: CorpusManifest, min_articles: int = DEFAULT_MIN_ARTICLES):
    """Split manifest countries into (kept, dropped) by article count.

    Dropped countries are logged; callers are expected to report them.
    """
    kept, dropped = [], []
    for c in manifest.countries:
        (kept if manifest.article_count(c) >= min_articles else dropped).append(c)
    for c in dropped:
        log.warning("excluding %s: %d articles < minimum %d", c, manifest.article_count(c), min_articles)
    return kept, dropped


@dataclass(frozen=True)
class CountryStats:
    country: str
    articles: int
    words: int
    pct_articles: float
    pct_words: float


@dataclass
class CorpusStats:
    rows: list[CountryStats]

    @property
    def total_articles(self) -> int:
        return sum(r.articles for r in self.rows)

    @property
    def total_words(self) -> int:
        return sum(r.words for r in self.rows)

    def by_country(self) -> dict[str, CountryStats]:
        return {r.country: r for r in self.rows}

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["country", "articles", "words", "pct_articles", "pct_words"])
            for r in self.rows:
                w.writerow([r.country, r.articles, r.words, f"{r.pct_articles:.2f}", f"{r.pct_words:.2f}"])
            w.writerow(["total", self.total_articles, self.total_words, "100.00", "100.00"])


def corpus_stats(
    manifest: CorpusManifest | Sequence[str],
    word_counts: Mapping[str, int],
    article_counts: Mapping[str, int] | None = None,
) -> CorpusStats:
    """Per-country article and word shares.

    ``manifest`` may be a manifest (article counts taken from it) or a plain
    country list, in which case ``article_counts`` is required.
    """
    if isinstance(manifest, CorpusManifest):
        countries = manifest.countries
        if article_counts is None:
            article_counts = {c: manifest.article_count(c) for c in countries}
    else:
        countries = list(manifest)
        if article_counts is None:
            raise DataError("article_counts required when no manifest is given")
    missing = [c for c in countries if c not in word_counts or c not in article_counts]
    if missing:
        raise DataError(f"no counts for {missing}")
    total_a = sum(article_counts[c] for c in countries)
    total_w = sum(word_counts[c] for c in countries)
    if total_w <= 0:
        raise DataError("zero total words")
    rows = []
    for c in countries:
        a, w = article_counts[c], word_counts[c]
        if a < 0 or w < 0:
            raise DataError(f"negative count for {c}")
        pct_a = 100.0 * a / total_a if total_a else 0.0
        rows.append(CountryStats(c, a, w, pct_a, 100.0 * w / total_w))
    return CorpusStats(rows)

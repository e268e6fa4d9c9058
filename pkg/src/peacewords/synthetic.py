"""Synthetic labeled corpora with planted class-dependent words.

Used by the tests and demos as a stand-in for a real news corpus: each
country's articles are drawn from a shared neutral vocabulary plus two
planted word groups whose rates differ between lower- and higher-peace
countries. Articles also carry stopwords, mid-sentence proper nouns and a
per-source boilerplate paragraph so every cleaning step has work to do.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from pathlib import Path

from .corpus import Article, write_articles
from .indices import CountryClass
from .text import FilterConfig

_CONSONANTS = "bdfgklmnprtvz"
_VOWELS = "aeiou"
_FILLERS = ("the", "and", "of", "to", "in", "was", "with", "for", "that", "it")
BOILERPLATE = "Subscribe now to get our daily newsletter delivered free to your inbox."


def pseudo_words(n: int, rng: np.random.Generator, exclude=frozenset()) -> list[str]:
    """n distinct lowercase consonant-vowel words of 2 or 3 syllables."""
    words: dict[str, None] = {}
    while len(words) < n:
        k = rng.integers(2, 4)
        w = "".join(rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS)) for _ in range(k))
        if w not in exclude:
            words[w] = None
    return list(words)


@dataclass
class SyntheticCorpus:
    articles: dict[str, list[Article]]
    labels: dict[str, CountryClass]
    planted_higher: list[str]
    planted_lower: list[str]
    neutral: list[str]
    entities: list[str] = field(default_factory=list)

    @property
    def planted(self) -> set[str]:
        return set(self.planted_higher) | set(self.planted_lower)

    @property
    def countries(self) -> list[str]:
        return list(self.articles)


def make_corpus(
    n_lower: int = 4,
    n_higher: int = 6,
    n_intermediate: int = 0,
    n_neutral: int = 60,
    n_planted: int = 30,
    effect: float = 4.0,
    articles_per_country: int = 40,
    sentences_per_article: int = 12,
    country_jitter: float = 0.3,
    planted_mass: float = 0.3,
    seed: int = 0,
) -> SyntheticCorpus:
    """Draw a corpus.

    ``n_planted`` words per class are ``effect`` times more frequent in that
    class's countries. Intermediate countries use the geometric middle rate.
    Planted words always take ``planted_mass`` of each country's token
    probability.
    """
    rng = np.random.default_rng(seed)
    cfg = FilterConfig.from_files()
    reserved = cfg.stopwords | cfg.gazetteer | set(cfg.lemma_map) | set(cfg.lemma_map.values())
    vocab = pseudo_words(n_neutral + 2 * n_planted + 12, rng, exclude=reserved)
    neutral = vocab[:n_neutral]
    planted_hi = vocab[n_neutral:n_neutral + n_planted]
    planted_lo = vocab[n_neutral + n_planted:n_neutral + 2 * n_planted]
    entities = [w.capitalize() + "ia" for w in vocab[n_neutral + 2 * n_planted:]]

    words = neutral + planted_hi + planted_lo
    base = 1.0 / np.arange(1, len(words) + 1) ** 0.7
    base = base[rng.permutation(len(words))]
    hi_mask = np.isin(words, planted_hi)
    lo_mask = np.isin(words, planted_lo)

    countries: list[tuple[str, CountryClass]] = (
        [(f"L{i:02d}", CountryClass.LOWER) for i in range(1, n_lower + 1)]
        + [(f"H{i:02d}", CountryClass.HIGHER) for i in range(1, n_higher + 1)]
        + [(f"M{i:02d}", CountryClass.INTERMEDIATE) for i in range(1, n_intermediate + 1)]
    )
    articles, labels = {}, {}
    for code, cls in countries:
        w = base * np.exp(country_jitter * rng.standard_normal(len(words)))
        boost = {CountryClass.HIGHER: (effect, 1.0), CountryClass.LOWER: (1.0, effect)}.get(
            cls, (np.sqrt(effect), np.sqrt(effect)))
        w = np.where(hi_mask, w * boost[0], w)
        w = np.where(lo_mask, w * boost[1], w)
        # fixed neutral mass, so boosting planted words leaves neutral rates classless
        planted = hi_mask | lo_mask
        probs = np.where(planted, planted_mass * w / w[planted].sum(), (1 - planted_mass) * w / w[~planted].sum())
        arts = []
        for a in range(articles_per_country):
            source = f"{code.lower()}-news" if a % 2 == 0 else f"{code.lower()}-daily"
            paras, sent = [], []
            for s in range(sentences_per_article):
                n_words = rng.integers(6, 11)
                toks = list(np.asarray(words)[rng.choice(len(words), size=n_words, p=probs)])
                toks.insert(rng.integers(1, n_words), _FILLERS[rng.integers(len(_FILLERS))])
                if rng.random() < 0.3:
                    toks.insert(rng.integers(1, len(toks)), entities[rng.integers(len(entities))])
                toks[0] = toks[0].capitalize()
                sent.append(" ".join(toks) + ".")
                if len(sent) == 4:
                    paras.append(" ".join(sent))
                    sent = []
            if sent:
                paras.append(" ".join(sent))
            if source.endswith("-news"):
                paras.append(BOILERPLATE)
            arts.append(Article(code, "\n\n".join(paras), source, f"2015-01-{a % 28 + 1:02d}"))
        articles[code] = arts
        labels[code] = cls
    return SyntheticCorpus(articles, labels, planted_hi, planted_lo, neutral, entities)


def write_corpus(corpus: SyntheticCorpus, directory: str | Path) -> tuple[Path, Path]:
    """Lay a corpus out on disk; returns (manifest path, labels csv path)."""
    directory = Path(directory)
    (directory / "articles").mkdir(parents=True, exist_ok=True)
    lines = []
    for country, arts in corpus.articles.items():
        write_articles(directory / "articles" / f"{country}.jsonl", arts)
        lines.append(f"{country}\tarticles/{country}.jsonl\n")
    manifest = directory / "manifest.tsv"
    manifest.write_text("".join(lines), encoding="utf-8")
    labels = directory / "labels.csv"
    with open(labels, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "class", "label"])
        for c, k in corpus.labels.items():
            w.writerow([c, int(k), k.name.lower()])
    return manifest, labels


def corpus_features(articles: dict[str, list[Article]], k: int = 300,
                    normalization: str = "per_million", config: FilterConfig | None = None):
    """Clean, count and featurize in memory; returns (FeatureMatrix, {country: FreqTable})."""
    from .features import build_vocabulary, count_words, featurize, top_k
    from .text import preprocess_corpus

    config = config or FilterConfig.from_files()
    tables = {c: count_words(c, preprocess_corpus(arts, config)) for c, arts in articles.items()}
    vocab = build_vocabulary({c: top_k(t, k) for c, t in tables.items()})
    return featurize(list(tables.values()), vocab, normalization), tables

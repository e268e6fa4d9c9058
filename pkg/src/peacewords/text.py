"""Article cleaning: boilerplate removal, tokenization, filtering, lemmatization."""
from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Article
from .errors import DataError

MIN_TOKEN_LENGTH = 2
DEFAULT_BOILERPLATE_THRESHOLD = 0.5

# Alphanumeric runs; underscores count as separators.
_WORD_RE = re.compile(r"[^\W_]+")
_SENTENCE_END_RE = re.compile(r"[.!?]|\n\s*\n")
_PARAGRAPH_RE = re.compile(r"\n\s*\n")


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    position: int
    sentence_initial: bool = False


def tokenize(text: str) -> list[Token]:
    """Split text into word tokens.

    Tokens shorter than two characters or containing any non-letter are
    dropped. Surface case is kept so later filters can spot proper nouns.
    """
    tokens = []
    prev_end = 0
    boundary = True
    for m in _WORD_RE.finditer(text):
        if _SENTENCE_END_RE.search(text, prev_end, m.start()):
            boundary = True
        prev_end = m.end()
        word = m.group()
        initial, boundary = boundary, False
        if len(word) < MIN_TOKEN_LENGTH or not word.isalpha():
            continue
        tokens.append(Token(word, word.lower(), len(tokens), initial))
    return tokens


def _suffix_lemma(word: str) -> str:
    if len(word) > 4 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 4 and word.endswith(("sses", "shes", "ches", "xes", "zes")):
        return word[:-2]
    if len(word) > 3 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def lemmatize(word: str, lemma_map: Mapping[str, str]) -> str:
    """Map a lowercase word to its lemma; the result is a fixed point."""
    for _ in range(8):
        nxt = lemma_map[word] if word in lemma_map else _suffix_lemma(word)
        if nxt == word:
            break
        word = nxt
    return word


@dataclass(frozen=True)
class FilterConfig:
    stopwords: frozenset[str] = frozenset()
    gazetteer: frozenset[str] = frozenset()
    boilerplate_threshold: float = DEFAULT_BOILERPLATE_THRESHOLD
    lemma_map: Mapping[str, str] = field(default_factory=dict)
    entity_heuristic: bool = True

    def __post_init__(self):
        if not 0.0 < self.boilerplate_threshold <= 1.0:
            raise DataError(f"boilerplate threshold must be in (0, 1], got {self.boilerplate_threshold}")
        for name in ("stopwords", "gazetteer"):
            words = getattr(self, name)
            bad = [w for w in words if w != w.lower()]
            if bad:
                raise DataError(f"{name} entries must be lowercase: {sorted(bad)[:5]}")
        for surface, lemma in self.lemma_map.items():
            if not lemma.isalpha() or lemma != lemma.lower():
                raise DataError(f"lemma for {surface!r} must be lowercase letters, got {lemma!r}")
            if lemmatize(lemma, self.lemma_map) != lemma:
                raise DataError(f"lemma {lemma!r} (from {surface!r}) is not its own lemma")

    @classmethod
    def from_files(
        cls,
        stopwords: str | Path | None = None,
        gazetteer: str | Path | None = None,
        lemma_map: str | Path | None = None,
        boilerplate_threshold: float = DEFAULT_BOILERPLATE_THRESHOLD,
        entity_heuristic: bool = True,
    ) -> "FilterConfig":
        """Build a config from resource files; ``None`` selects the shipped default."""
        return cls(
            stopwords=frozenset(read_word_list(stopwords or _resource("stopwords.txt"))),
            gazetteer=frozenset(read_word_list(gazetteer or _resource("gazetteer.txt"))),
            boilerplate_threshold=boilerplate_threshold,
            lemma_map=read_lemma_map(lemma_map or _resource("lemmas.tsv")),
            entity_heuristic=entity_heuristic,
        )


def _resource(name: str) -> Path:
    return Path(str(resources.files("peacewords") / "resources" / name))


def _read_lines(path: str | Path) -> list[str]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"resource file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]


def read_word_list(path: str | Path) -> list[str]:
    """One lowercase word per line; duplicates collapse, first occurrence wins."""
    return list(dict.fromkeys(ln.lower() for ln in _read_lines(path)))


def read_lemma_map(path: str | Path) -> dict[str, str]:
    out = {}
    for i, line in enumerate(_read_lines(path), 1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}: entry {i} is not surface<TAB>lemma: {line!r}")
        out[parts[0].lower()] = parts[1].lower()
    return out


def split_paragraphs(text: str) -> list[str]:
    return [p.strip() for p in _PARAGRAPH_RE.split(text) if p.strip()]


def strip_boilerplate(texts: Sequence[str], threshold: float = DEFAULT_BOILERPLATE_THRESHOLD) -> list[str]:
    """Remove paragraphs repeated across more than ``threshold`` of one source's articles.

    Articles with nothing removed are returned verbatim.
    """
    if len(texts) < 2:
        return list(texts)
    paragraphs = [split_paragraphs(t) for t in texts]
    df = Counter(p for paras in paragraphs for p in set(paras))
    n = len(texts)
    common = {p for p, c in df.items() if c / n > threshold}
    if not common:
        return list(texts)
    out = []
    for text, paras in zip(texts, paragraphs):
        if any(p in common for p in paras):
            out.append("\n\n".join(p for p in paras if p not in common))
        else:
            out.append(text)
    return out


def filter_tokens(tokens: Iterable[Token], config: FilterConfig) -> list[Token]:
    """Drop stopwords, gazetteer names and (optionally) mid-sentence capitalized words.

    Survivors carry their lemma. A token is also dropped when its lemma is a
    stopword or gazetteer entry, or shorter than two letters.
    """
    out = []
    for tok in tokens:
        lower = tok.surface.lower()
        if lower in config.stopwords or lower in config.gazetteer:
            continue
        if config.entity_heuristic and tok.surface[0].isupper() and not tok.sentence_initial:
            continue
        lemma = lemmatize(lower, config.lemma_map)
        if len(lemma) < MIN_TOKEN_LENGTH or lemma in config.stopwords or lemma in config.gazetteer:
            continue
        out.append(Token(tok.surface, lemma, tok.position, tok.sentence_initial))
    return out


def preprocess(article: Article | str, config: FilterConfig) -> list[str]:
    """Lemmas of one article. Boilerplate removal happens at corpus level."""
    text = article.text if isinstance(article, Article) else article
    return [t.lemma for t in filter_tokens(tokenize(text), config)]


def preprocess_corpus(articles: Sequence[Article], config: FilterConfig) -> list[list[str]]:
    """Clean a country's articles: per-source boilerplate pass, then per-article filtering.

    Articles without a source form one group. Output order follows input order.
    """
    by_source: dict[str | None, list[int]] = defaultdict(list)
    for i, a in enumerate(articles):
        by_source[a.source].append(i)
    texts = [a.text for a in articles]
    for idx in by_source.values():
        cleaned = strip_boilerplate([texts[i] for i in idx], config.boilerplate_threshold)
        for i, t in zip(idx, cleaned):
            texts[i] = t
    return [preprocess(t, config) for t in texts]

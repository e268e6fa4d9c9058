"""Command-line pipeline: each stage reads and writes files under one output directory.

    peacewords report --config run.ini --out results/

Stages: preprocess, featurize, classify-countries, train, evaluate,
importance, score; ``report`` runs them all in order.
Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import re
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import DEFAULT_MIN_ARTICLES, corpus_stats, load_manifest, stream_articles, sufficient_countries
from .errors import DataError, NumericError
from .evaluation import evaluate, random_baseline, write_prediction_log, write_report_csv, z_test
from .features import DEFAULT_K, FeatureMatrix, FreqTable, build_vocabulary, count_words, featurize, top_k
from .indices import (
    CountryClass, classify_countries, compare_classes, read_index_csv, read_labels_csv,
    scale_table, write_class_csv, write_scaled_csv,
)
from .learners import LearnerSpec, LRHyper, RFHyper, gini_importance, load_model, save_model, train_forest, train_logistic
from .scoring import rank_countries, score_rows, word_report, wordcloud_export, write_ranking_csv, write_word_report_csv
from .text import FilterConfig, preprocess_corpus

log = logging.getLogger("peacewords")

STAGE_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    manifest: str | None = None
    min_articles: int = DEFAULT_MIN_ARTICLES
    stopwords: str | None = None
    gazetteer: str | None = None
    lemmas: str | None = None
    boilerplate_threshold: float = 0.5
    entity_heuristic: bool = True
    k: int = DEFAULT_K
    normalization: str = "per_million"
    index_csv: str | None = None
    labels_file: str | None = None
    tertile: str = "ceil"
    l2_strength: float = 1.0
    tol: float = 1e-8
    max_iter: int = 5000
    standardize: bool = True
    n_trees: int = 100
    max_features: str = "sqrt"
    min_samples_leaf: int = 1
    seed: int = 0
    n_runs: int = 20
    top_n: int = 100
    flag_n: int = 50
    out: str = "out"
    workers: int = field(default=1, metadata={"hashed": False})

    def __post_init__(self):
        if self.k < 1:
            raise DataError("k must be >= 1")

    def config_hash(self) -> str:
        doc = {f.name: getattr(self, f.name) for f in fields(self)
               if f.metadata.get("hashed", True) and f.name != "out"}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()

    def filter_config(self) -> FilterConfig:
        return FilterConfig.from_files(self.stopwords, self.gazetteer, self.lemmas,
                                       self.boilerplate_threshold, self.entity_heuristic)

    def lr_hyper(self) -> LRHyper:
        return LRHyper(self.l2_strength, self.tol, self.max_iter, self.standardize)

    def rf_hyper(self) -> RFHyper:
        mf = int(self.max_features) if str(self.max_features).isdigit() else self.max_features
        return RFHyper(self.n_trees, mf, self.min_samples_leaf)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if "bool" in kind:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    raw = raw.strip()
    return (raw or None) if "None" in kind else raw


def load_config(path: str | Path | None, overrides: dict) -> RunConfig:
    """INI file (any section names; keys are RunConfig fields) plus flag overrides.

    Relative paths in the file resolve against the file's directory.
    """
    values = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise DataError(f"config not found: {path}")
        parser = configparser.ConfigParser()
        parser.read(path, encoding="utf-8")
        known = {f.name for f in fields(RunConfig)}
        for section in parser.sections():
            for key, raw in parser.items(section):
                if key not in known:
                    raise DataError(f"{path}: unknown key {key!r} in [{section}]")
                val = _coerce(key, raw)
                if key in ("manifest", "stopwords", "gazetteer", "lemmas", "index_csv", "labels_file", "out") \
                        and val and not Path(val).is_absolute():
                    val = str(path.parent / val)
                values[key] = val
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


# --- output helpers ------------------------------------------------------------

def _stamp(path: Path, cfg: RunConfig, stage: str) -> None:
    """Merge run metadata into the ``<path>.meta.json`` sidecar."""
    meta_path = Path(str(path) + ".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    meta.update(config_hash=cfg.config_hash(), seed=cfg.seed, stage=stage,
                stage_version=STAGE_VERSION, package_version=__version__)
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_") or "country"


def _json_float(x: float):
    """Strict JSON has no infinity; spell it out."""
    return x if np.isfinite(x) else ("inf" if x > 0 else "-inf")


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise DataError(f"missing {path}; run `{hint}` first")
    return path


# --- stages --------------------------------------------------------------------

def cmd_preprocess(cfg: RunConfig) -> None:
    if not cfg.manifest:
        raise DataError("no corpus manifest configured (--manifest)")
    filters = cfg.filter_config()
    manifest = load_manifest(cfg.manifest)
    kept, dropped = sufficient_countries(manifest, cfg.min_articles)
    if not kept:
        raise DataError(f"no country has at least {cfg.min_articles} articles")
    out = cfg.out_dir / "tokens"
    out.mkdir(parents=True, exist_ok=True)
    index_rows, word_counts = [], {}
    for country in kept:
        lemmas = preprocess_corpus(list(stream_articles(manifest, country)), filters)
        fname = _safe(country) + ".txt"
        with open(out / fname, "w", encoding="utf-8", newline="\n") as fh:
            for article in lemmas:
                fh.write(" ".join(article) + "\n")
        word_counts[country] = sum(len(a) for a in lemmas)
        index_rows.append((country, fname))
    with open(out / "index.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "file"])
        w.writerows(index_rows)
    _stamp(out / "index.csv", cfg, "preprocess")
    stats = corpus_stats(manifest.restrict(kept), word_counts)
    stats.to_csv(cfg.out_dir / "corpus_stats.csv")
    _stamp(cfg.out_dir / "corpus_stats.csv", cfg, "preprocess")
    (cfg.out_dir / "excluded_countries.json").write_text(json.dumps(
        {c: manifest.article_count(c) for c in dropped}, indent=2, sort_keys=True) + "\n")
    log.info("preprocessed %d countries (%d excluded)", len(kept), len(dropped))


def _read_token_files(cfg: RunConfig) -> dict[str, list[list[str]]]:
    tokens = cfg.out_dir / "tokens"
    out = {}
    with open(_require(tokens / "index.csv", "preprocess"), encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            with open(tokens / row["file"], encoding="utf-8") as tf:
                out[row["country"]] = [line.split() for line in tf.read().split("\n")[:-1]]
    return out


def cmd_featurize(cfg: RunConfig) -> None:
    tables = [count_words(c, arts) for c, arts in _read_token_files(cfg).items()]
    freq_dir = cfg.out_dir / "freq"
    freq_dir.mkdir(parents=True, exist_ok=True)
    with open(freq_dir / "totals.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "file", "total_words"])
        for t in tables:
            fname = _safe(t.country) + ".csv"
            t.to_csv(freq_dir / fname)
            w.writerow([t.country, fname, t.total_words])
    vocab = build_vocabulary({t.country: top_k(t, cfg.k) for t in tables})
    with open(cfg.out_dir / "vocabulary.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "countries"])
        for word in vocab.words:
            w.writerow([word, ";".join(sorted(vocab.provenance[word]))])
    fm = featurize(tables, vocab, cfg.normalization)
    fm.to_csv(cfg.out_dir / "features.csv")
    _stamp(cfg.out_dir / "features.csv", cfg, "featurize")
    log.info("vocabulary of %d words over %d countries", len(vocab), len(tables))


def read_freq_tables(cfg: RunConfig) -> dict[str, FreqTable]:
    freq_dir = cfg.out_dir / "freq"
    out = {}
    with open(_require(freq_dir / "totals.csv", "featurize"), encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["country"]] = FreqTable.from_csv(freq_dir / row["file"], row["country"], int(row["total_words"]))
    return out


def cmd_classify_countries(cfg: RunConfig) -> None:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    classes = None
    if cfg.index_csv:
        table = read_index_csv(cfg.index_csv)
        scaled, groups, classes = classify_countries(table, convention=cfg.tertile)
        write_scaled_csv(out / "scaled_indices.csv", scaled)
        _stamp(out / "scaled_indices.csv", cfg, "classify-countries")
        write_class_csv(out / "computed_classes.csv", classes, groups)
        _stamp(out / "computed_classes.csv", cfg, "classify-countries")
    if cfg.labels_file:
        labels = read_labels_csv(cfg.labels_file)
        if classes is not None:
            compare_classes(classes, labels)
        classes = labels
    if classes is None:
        raise DataError("need --index-csv or --labels-file to classify countries")
    write_class_csv(out / "classes.csv", classes)
    _stamp(out / "classes.csv", cfg, "classify-countries")


def _labeled_features(cfg: RunConfig):
    fm = FeatureMatrix.from_csv(_require(cfg.out_dir / "features.csv", "featurize"))
    labels = read_labels_csv(_require(cfg.out_dir / "classes.csv", "classify-countries"))
    missing = [c for c in fm.countries if c not in labels]
    if missing:
        log.warning("no class for %s; left out of training", missing)
    countries = [c for c in fm.countries if c in labels]
    return fm, {c: labels[c] for c in countries}


def _extremes(labels):
    return [c for c, k in labels.items() if k in (CountryClass.LOWER, CountryClass.HIGHER)]


def cmd_train(cfg: RunConfig) -> None:
    fm, labels = _labeled_features(cfg)
    digest = fm.vocab.digest()
    models = cfg.out_dir / "models"
    models.mkdir(parents=True, exist_ok=True)
    sets = {"2class": _extremes(labels)}
    if len(set(labels.values())) == 3:
        sets["3class"] = list(labels)
    for name, countries in sets.items():
        sub = fm.subset(countries)
        y = np.array([int(labels[c]) for c in countries])
        lr = train_logistic(sub.values, y, cfg.lr_hyper())
        if not lr.converged:
            log.warning("logistic %s stopped after %d iterations without reaching tol", name, lr.n_iter)
        save_model(lr, models / f"logistic_{name}.json", digest, fm.normalization)
        rf = train_forest(sub.values, y, cfg.rf_hyper(), seed=cfg.seed, workers=cfg.workers)
        save_model(rf, models / f"forest_{name}.json", digest, fm.normalization)
        for kind in ("logistic", "forest"):
            _stamp(models / f"{kind}_{name}.json", cfg, "train")


def cmd_evaluate(cfg: RunConfig) -> None:
    fm, labels = _labeled_features(cfg)
    out = cfg.out_dir / "evaluation"
    out.mkdir(parents=True, exist_ok=True)
    specs = {
        "forest": LearnerSpec("forest", rf=cfg.rf_hyper()),
        "logistic": LearnerSpec("logistic", lr=cfg.lr_hyper()),
    }
    all_countries = list(labels)
    y_all = np.array([int(labels[c]) for c in all_countries])
    n_classes = len(set(y_all))
    rows = []
    baseline = random_baseline(y_all, cfg.n_runs, cfg.seed)
    rows.append(("random", f"{n_classes}-class guessing", baseline))
    plans = []
    if n_classes == 3:
        plans += [("3-class", "split", all_countries), ("3-class", "loocv", all_countries)]
    plans.append(("2-class", "loocv", _extremes(labels)))
    significance = {}
    for kind, spec in specs.items():
        for tag, scheme, countries in plans:
            sub = fm.subset(countries)
            y = np.array([int(labels[c]) for c in countries])
            ev = evaluate(sub.values, y, countries, spec, scheme, cfg.n_runs, cfg.seed, cfg.workers)
            label = f"{tag} {scheme}"
            rows.append((kind, label, ev.aggregate))
            write_prediction_log(out / f"predictions_{kind}_{tag}_{scheme}.csv", ev.log)
            if tag.startswith(str(n_classes)):
                z = z_test(ev.aggregate["accuracy"], baseline["accuracy"])
                significance[f"{kind} {label}"] = {"z": _json_float(z.z), "p_value": z.p_value, "sem_choice": z.sem_choice}
    write_report_csv(out / "report.csv", rows)
    _stamp(out / "report.csv", cfg, "evaluate")
    (out / "significance.json").write_text(json.dumps(significance, indent=2, sort_keys=True) + "\n")


def cmd_importance(cfg: RunConfig) -> None:
    fm, labels = _labeled_features(cfg)
    rf = load_model(_require(cfg.out_dir / "models" / "forest_2class.json", "train"))
    imp = gini_importance(rf)
    out = cfg.out_dir / "importance"
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "importance.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "importance"])
        for i in np.argsort(-imp, kind="stable"):
            w.writerow([fm.vocab.words[i], repr(float(imp[i]))])
    tables = read_freq_tables(cfg)
    by_class = {
        k: [tables[c] for c in labels if labels[c] == k and c in tables]
        for k in (CountryClass.HIGHER, CountryClass.LOWER)
    }
    report = word_report(by_class, imp, fm.vocab, cfg.top_n, cfg.flag_n)
    write_word_report_csv(out / "word_report.csv", report, {"flag_n": cfg.flag_n, "top_n": cfg.top_n})
    _stamp(out / "word_report.csv", cfg, "importance")
    for k, name in ((CountryClass.HIGHER, "higher"), (CountryClass.LOWER, "lower")):
        wordcloud_export(out / f"wordcloud_{name}.csv", {k: report[k]}, important_only=True)


def cmd_score(cfg: RunConfig) -> None:
    fm = FeatureMatrix.from_csv(_require(cfg.out_dir / "features.csv", "featurize"))
    model = load_model(_require(cfg.out_dir / "models" / "logistic_2class.json", "train"))
    scores = score_rows(model, fm.countries, fm.values)
    reference = scale_table(read_index_csv(cfg.index_csv)) if cfg.index_csv else {}
    rows = rank_countries(scores, reference)
    write_ranking_csv(cfg.out_dir / "ranking.csv", rows)
    _stamp(cfg.out_dir / "ranking.csv", cfg, "score")


def cmd_report(cfg: RunConfig) -> None:
    for stage in (cmd_preprocess, cmd_featurize, cmd_classify_countries, cmd_train,
                  cmd_evaluate, cmd_importance, cmd_score):
        stage(cfg)


COMMANDS = {
    "preprocess": cmd_preprocess,
    "featurize": cmd_featurize,
    "classify-countries": cmd_classify_countries,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "importance": cmd_importance,
    "score": cmd_score,
    "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--k", type=int, help="top words per country")
    common.add_argument("--normalization", choices=("raw_count", "per_million"))
    common.add_argument("--labels-file", dest="labels_file")
    common.add_argument("--index-csv", dest="index_csv")
    common.add_argument("--manifest")
    common.add_argument("--stopwords")
    common.add_argument("--gazetteer")
    common.add_argument("--lemmas")
    common.add_argument("--min-articles", dest="min_articles", type=int)
    common.add_argument("--n-runs", dest="n_runs", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    parser = _Parser(prog="peacewords", description="News-corpus peace index pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "command", "verbose")}
    try:
        cfg = load_config(args.config, overrides)
        COMMANDS[args.command](cfg)
    except (NumericError, FloatingPointError) as exc:
        print(f"peacewords: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError, KeyError) as exc:
        print(f"peacewords: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

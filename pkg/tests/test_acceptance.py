"""Acceptance checks, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.

The published-data check needs ``PEACEWORDS_PUBLISHED_DATA`` pointing at a
directory with ``totals.csv`` (country,file,total_words) and one
``word,count`` table per country, plus an optional ``labels.csv``.
"""
from __future__ import annotations

import csv
import os
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from peacewords.evaluation import (
    Aggregate, ConfusionMatrix, evaluate, metrics, random_baseline, z_test,
)
from peacewords.features import FreqTable, build_vocabulary, featurize, top_k
from peacewords.indices import (
    CountryClass, classify_countries, compare_classes, default_index_csv, default_labels_csv,
    read_index_csv, read_labels_csv, scale_table,
)
from peacewords.learners import (
    LearnerSpec, LRHyper, RFHyper, gini_importance, lr_gradient, lr_loss, train_forest, train_logistic,
)
from peacewords.scoring import ml_peace_index, rank_countries, score_rows
from peacewords.synthetic import corpus_features, make_corpus

REFERENCE = Path(__file__).parent / "data" / "scaled_reference.csv"
RANK_REFERENCE = Path(__file__).parent / "data" / "ml_rank_reference.csv"
RESULTS: list[str] = []


def report(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_index_scaling():
    t0 = time.perf_counter()
    scaled = scale_table(read_index_csv(default_index_csv()))
    ref = read_index_csv(REFERENCE)
    worst, cells, shape_ok = 0.0, 0, True
    for c, row in ref.items():
        shape_ok &= scaled[c].keys() == row.keys()
        for name, v in row.items():
            worst = max(worst, abs(scaled[c][name] - v))
            cells += 1
    dt = time.perf_counter() - t0
    report("index scaling", shape_ok and worst <= 0.01 and dt < 1.0,
           f"{cells} cells, max |diff| {worst:.4f} (tol 0.01), missing cells preserved={shape_ok}, {dt * 1e3:.1f} ms")


def test_class_assignment():
    _, _, computed = classify_countries(read_index_csv(default_index_csv()))
    labels = read_labels_csv(default_labels_csv())
    want_lower = {"Bangladesh", "Kenya", "Nigeria", "Tanzania"}
    want_higher = {"Australia", "Canada", "Ireland", "New Zealand", "Singapore", "United Kingdom"}
    sets = lambda d, k: {c for c, v in d.items() if v is k}
    computed_ok = sets(computed, CountryClass.LOWER) == want_lower and sets(computed, CountryClass.HIGHER) == want_higher
    labels_ok = (sets(labels, CountryClass.LOWER) == want_lower and sets(labels, CountryClass.HIGHER) == want_higher
                 and len(labels) == 18)
    diverged = compare_classes(computed, labels)
    # the labels file must reproduce the reference sets; the tertile rule may differ only on boundary
    # countries, and every such difference is logged
    higher_ok = sets(computed, CountryClass.HIGHER) == want_higher
    boundary_only = all(ref is CountryClass.INTERMEDIATE for _, ref in diverged.values())
    ok = labels_ok and (computed_ok or (higher_ok and boundary_only))
    report("class assignment", ok,
           f"tertile rule exact={computed_ok}; labels-file path exact={labels_ok}; "
           f"logged boundary divergences={sorted(diverged)}")


def test_metric_formulas():
    r = metrics(ConfusionMatrix.from_binary_counts(tp=3, tn=4, fp=1, fn=2), "binary")
    want = (0.7, 0.75, 0.6, 2 / 3)
    got = (r.accuracy, r.precision, r.recall, r.f1)
    formulas_ok = all(abs(a - b) <= 1e-4 for a, b in zip(got, want))
    rng = np.random.default_rng(0)
    exact = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(100):
            k = int(rng.integers(2, 5))
            m = rng.integers(0, 20, size=(k, k))
            m[0, 0] += 1
            w = metrics(ConfusionMatrix(tuple(range(k)), m), "weighted")
            exact += w.recall == w.accuracy
    report("metric formulas", formulas_ok and exact == 100,
           f"acc/prec/rec/F1 = {', '.join(f'{v:.4f}' for v in got)}; weighted recall == accuracy on {exact}/100 matrices")


def test_gradient():
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    worst = 0.0
    for i in range(20):
        k = 2 if i % 2 == 0 else 3
        n, d = int(rng.integers(k + 2, 21)), int(rng.integers(1, 11))
        X = rng.normal(size=(n, d)) * rng.uniform(0.5, 3, size=d)
        y = np.arange(n) % k
        m = train_logistic(X, y, LRHyper(l2_strength=float(rng.uniform(0, 2)), max_iter=1))
        m = m.with_params(rng.normal(size=m.params().shape))
        theta, h = m.params(), 1e-6
        fd = np.array([(lr_loss(m.with_params(theta + h * e), X, y) - lr_loss(m.with_params(theta - h * e), X, y)) / (2 * h)
                       for e in np.eye(len(theta))])
        g = lr_gradient(m, X, y)
        worst = max(worst, float(np.max(np.abs(g - fd) / np.maximum(1.0, np.maximum(np.abs(g), np.abs(fd))))))
    dt = time.perf_counter() - t0
    report("gradient check", worst < 1e-5 and dt < 10, f"max relative error {worst:.2e} over 20 instances (tol 1e-5), {dt:.2f} s")


@pytest.fixture(scope="module")
def synthetic():
    corpus = make_corpus(n_lower=4, n_higher=6, seed=0)
    fm, tables = corpus_features(corpus.articles, k=100)
    y = np.array([int(corpus.labels[c]) for c in fm.countries])
    return corpus, fm, y


def test_determinism(synthetic):
    from peacewords.learners.artifact import model_to_dict
    _, fm, y = synthetic
    lr_same = model_to_dict(train_logistic(fm.values, y)) == model_to_dict(train_logistic(fm.values, y))
    rf = [model_to_dict(train_forest(fm.values, y, RFHyper(n_trees=50), seed=7, workers=w)) for w in (1, 1, 4)]
    rf_same = rf[0] == rf[1] == rf[2]
    spec = LearnerSpec("forest", rf=RFHyper(n_trees=20))
    ev = [evaluate(fm.values, y, fm.countries, spec, "loocv", n_runs=3, seed=1, workers=w) for w in (1, 4)]
    # compare reprs: forest records carry p = nan, which never compares equal to itself
    eval_same = repr(ev[0].log) == repr(ev[1].log) and ev[0].aggregate == ev[1].aggregate
    lr_runs = evaluate(fm.values, y, fm.countries, LearnerSpec("logistic"), "loocv", n_runs=20, seed=0)
    sem0 = all(a.sem == 0 for a in lr_runs.aggregate.values())
    report("determinism", lr_same and rf_same and eval_same and sem0,
           f"LR artifacts identical={lr_same}; RF identical for equal seed across 1/4 workers={rf_same}; "
           f"LOOCV logs identical across workers={eval_same}; LR sem over 20 runs is 0={sem0}")


def test_synthetic_end_to_end(synthetic):
    t0 = time.perf_counter()
    corpus, fm, y = synthetic
    accs = {}
    for kind, spec in (("LR", LearnerSpec("logistic")), ("RF", LearnerSpec("forest"))):
        ev = evaluate(fm.values, y, fm.countries, spec, "loocv", n_runs=20, seed=0)
        accs[kind] = ev.aggregate["accuracy"].mean
    imp = gini_importance(train_forest(fm.values, y, RFHyper(), seed=0))
    planted = np.isin(fm.vocab.words, sorted(corpus.planted))
    share = float(imp[planted].sum() / imp.sum())
    dt = time.perf_counter() - t0 + 0.0
    ok = min(accs.values()) >= 0.9 and share >= 0.8 and dt < 120
    report("synthetic end-to-end", ok,
           f"6 vs 4 countries, LOOCV x20 accuracy LR {accs['LR']:.3f} RF {accs['RF']:.3f} (>= 0.9); "
           f"planted share of Gini importance {share:.2f} (>= 0.80); {dt:.1f} s")


def test_interpolation(synthetic):
    _, fm, y = synthetic
    model = train_logistic(fm.values, y)
    scores = score_rows(model, fm.countries, fm.values)
    lo = min((s for s, k in zip(scores, y) if k == 0), key=lambda s: s.index)
    hi = max((s for s, k in zip(scores, y) if k == 1), key=lambda s: s.index)
    lams = np.linspace(0, 1, 41)
    idx = np.array([ml_peace_index(model, (1 - t) * fm.row(lo.country) + t * fm.row(hi.country)).index for t in lams])
    monotone = bool(np.all(np.diff(idx) >= 0))
    between = bool(np.all((idx[1:-1] > lo.index) & (idx[1:-1] < hi.index)))
    report("peace-index interpolation", monotone and between,
           f"41 mixtures of {lo.country} ({lo.index:.2f}) and {hi.country} ({hi.index:.2f}): "
           f"monotone={monotone}, strictly between={between}")


def test_z_test():
    r = z_test(Aggregate(0.525, 0.040, 20), Aggregate(0.356, 0.033, 20), "model_runs")
    report("Z test", 4.0 <= r.z <= 4.3 and r.p_value < 2e-5, f"z = {r.z:.3f} (in [4.0, 4.3]), one-tailed p = {r.p_value:.2e} (< 2e-5)")


def test_random_baseline():
    labels = np.array([int(v) for v in read_labels_csv(default_labels_csv()).values()])
    acc = random_baseline(labels, n_runs=20, seed=0)["accuracy"]
    dev = abs(acc.mean - 1 / 3)
    report("random baseline", dev <= 3 * acc.sem,
           f"3-class guessing on 18 countries, 20 runs: {acc.mean:.3f} +/- {acc.sem:.3f}; |mean - 1/3| = {dev:.3f} <= 3 sem")


def same_order_up_to_swaps(got, want, swappable) -> bool:
    """Equal sequences, except adjacent pairs of ``swappable`` items may trade places."""
    if sorted(got) != sorted(want):
        return False
    i = 0
    while i < len(want):
        if got[i] == want[i]:
            i += 1
        elif (i + 1 < len(want) and got[i] == want[i + 1] and got[i + 1] == want[i]
              and {got[i], want[i]} <= swappable):
            i += 2
        else:
            return False
    return True


def test_swap_helper():
    assert same_order_up_to_swaps(list("abcd"), list("abcd"), set())
    assert same_order_up_to_swaps(list("acbd"), list("abcd"), {"b", "c"})
    assert not same_order_up_to_swaps(list("acbd"), list("abcd"), {"b"})
    assert not same_order_up_to_swaps(list("cabd"), list("abcd"), set("abcd"))


def _published_dir():
    raw = os.environ.get("PEACEWORDS_PUBLISHED_DATA")
    return Path(raw) if raw and (Path(raw) / "totals.csv").is_file() else None


def test_published_data():
    data = _published_dir()
    if data is None:
        line = "SKIP  published data: PEACEWORDS_PUBLISHED_DATA not set (needs the released word-frequency tables)"
        RESULTS.append(line)
        print(line)
        pytest.skip("published word-frequency data not supplied")
    with open(data / "totals.csv", newline="") as fh:
        tables = {r["country"]: FreqTable.from_csv(data / r["file"], r["country"], int(r["total_words"]))
                  for r in csv.DictReader(fh)}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        vocab = build_vocabulary({c: top_k(t, 300) for c, t in tables.items()})
    fm = featurize(list(tables.values()), vocab)
    labels = read_labels_csv(data / "labels.csv" if (data / "labels.csv").is_file() else default_labels_csv())
    two = [c for c in fm.countries if labels.get(c) in (CountryClass.LOWER, CountryClass.HIGHER)]
    sub = fm.subset(two)
    y = np.array([int(labels[c]) for c in two])
    lr = evaluate(sub.values, y, two, LearnerSpec("logistic"), "loocv", 20, 0).aggregate["accuracy"].mean
    rf = evaluate(sub.values, y, two, LearnerSpec("forest"), "loocv", 20, 0).aggregate["accuracy"].mean
    ranked = [r.country for r in rank_countries(score_rows(train_logistic(sub.values, y), fm.countries, fm.values))]
    with open(RANK_REFERENCE, newline="") as fh:
        want = [r["country"] for r in csv.DictReader(fh)]
    intermediate = {c for c, k in labels.items() if k is CountryClass.INTERMEDIATE}
    order_ok = same_order_up_to_swaps(ranked, want, intermediate)
    ok = len(vocab) == 767 and lr == 1.0 and rf >= 0.9 and order_ok
    report("published data", ok,
           f"vocabulary {len(vocab)} (767); 2-class LOOCV LR {lr:.3f} (1.000), RF {rf:.3f} (>= 0.90); "
           f"rank order matches up to intermediate adjacent swaps={order_ok}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))

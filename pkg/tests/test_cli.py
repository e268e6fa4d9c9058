import filecmp
import json
from pathlib import Path

import pytest

from peacewords.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, load_config, main
from peacewords.indices import default_index_csv, default_labels_csv
from peacewords.synthetic import make_corpus, write_corpus


def _tree_files(root: Path):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    manifest, labels = write_corpus(make_corpus(seed=1), d)
    return manifest, labels


def _args(corpus_dir, out, *extra):
    manifest, labels = corpus_dir
    return ["--manifest", str(manifest), "--labels-file", str(labels), "--min-articles", "10",
            "--k", "50", "--n-runs", "2", "--out", str(out), *extra]


@pytest.fixture(scope="module")
def first_run(corpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "a"
    assert main(["report", *_args(corpus_dir, out)]) == EXIT_OK
    return out


def test_report_writes_every_stage(first_run):
    files = {str(p) for p in _tree_files(first_run)}
    for name in ("corpus_stats.csv", "features.csv", "features.csv.meta.json", "classes.csv",
                 "models/logistic_2class.json", "models/forest_2class.json", "evaluation/report.csv",
                 "evaluation/significance.json", "importance/importance.csv", "importance/word_report.csv",
                 "importance/wordcloud_higher.csv", "importance/wordcloud_lower.csv", "ranking.csv",
                 "tokens/index.csv", "freq/totals.csv", "vocabulary.csv"):
        assert name in files, name
    meta = json.loads((first_run / "features.csv.meta.json").read_text())
    assert meta["stage"] == "featurize" and meta["seed"] == 0 and len(meta["config_hash"]) == 64
    report = (first_run / "evaluation" / "report.csv").read_text().splitlines()
    assert report[2].startswith("forest,2-class loocv,1.000")
    assert report[3].startswith("logistic,2-class loocv,1.000")


def test_rerun_is_byte_identical_across_workers(corpus_dir, first_run, tmp_path):
    out = tmp_path / "b"
    assert main(["report", *_args(corpus_dir, out, "--workers", "3")]) == EXIT_OK
    assert _tree_files(out) == _tree_files(first_run)
    for rel in _tree_files(out):
        assert filecmp.cmp(out / rel, first_run / rel, shallow=False), rel


def test_stages_one_by_one(corpus_dir, first_run, tmp_path):
    out = tmp_path / "c"
    for stage in ("preprocess", "featurize", "classify-countries", "train", "evaluate", "importance", "score"):
        assert main([stage, *_args(corpus_dir, out)]) == EXIT_OK, stage
    for rel in _tree_files(first_run):
        assert filecmp.cmp(out / rel, first_run / rel, shallow=False), rel


def test_seed_changes_forest_only(corpus_dir, first_run, tmp_path):
    out = tmp_path / "d"
    assert main(["report", *_args(corpus_dir, out, "--seed", "9")]) == EXIT_OK
    assert filecmp.cmp(out / "features.csv", first_run / "features.csv", shallow=False)
    assert (out / "models/logistic_2class.json").read_bytes() == (first_run / "models/logistic_2class.json").read_bytes()
    assert (out / "models/forest_2class.json").read_bytes() != (first_run / "models/forest_2class.json").read_bytes()


def test_classify_from_index_table(tmp_path):
    assert main(["classify-countries", "--index-csv", str(default_index_csv()),
                 "--labels-file", str(default_labels_csv()), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "classes.csv").read_bytes() == Path(default_labels_csv()).read_bytes()
    scaled = (tmp_path / "scaled_indices.csv").read_text().splitlines()
    assert scaled[1] == "Australia,89.68,93.98,97.38,97.78,100.00"
    assert scaled[5] == "Hong Kong,,,49.74,,100.00"


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-stage"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["featurize", "--k", "many"])
    assert exc.value.code == EXIT_USAGE


def test_data_error_exit_codes(tmp_path, corpus_dir, capsys):
    assert main(["featurize", "--out", str(tmp_path)]) == EXIT_DATA
    assert "preprocess" in capsys.readouterr().err
    assert main(["preprocess", *_args(corpus_dir, tmp_path, "--stopwords", str(tmp_path / "gone.txt"))]) == EXIT_DATA
    assert "gone.txt" in capsys.readouterr().err
    assert main(["preprocess", "--manifest", str(tmp_path / "none.tsv"), "--out", str(tmp_path)]) == EXIT_DATA


def test_config_file_and_overrides(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[corpus]\nmanifest = data/m.tsv\n[model]\nk = 20\nseed = 4\nstandardize = no\n")
    cfg = load_config(ini, {"seed": 7, "workers": 8})
    assert cfg.manifest == str(tmp_path / "data" / "m.tsv")
    assert (cfg.k, cfg.seed, cfg.standardize, cfg.workers) == (20, 7, False, 8)
    # workers and output location do not enter the config hash
    assert cfg.config_hash() == load_config(ini, {"seed": 7, "out": "elsewhere"}).config_hash()
    ini.write_text("[x]\nbogus = 1\n")
    with pytest.raises(Exception, match="unknown key"):
        load_config(ini, {})

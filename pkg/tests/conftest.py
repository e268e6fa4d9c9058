import numpy as np
import pytest

from peacewords.synthetic import corpus_features, make_corpus


@pytest.fixture(scope="session")
def corpus():
    return make_corpus(seed=0)


@pytest.fixture(scope="session")
def features(corpus):
    fm, tables = corpus_features(corpus.articles, k=100)
    y = np.array([int(corpus.labels[c]) for c in fm.countries])
    return fm, tables, y


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

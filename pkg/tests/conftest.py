import numpy as np
import pytest

from labelaug import Dataset, SparseLabelMatrix, TextCorpus, build_cooccurrence


@pytest.fixture
def toy_y():
    # three instances: {0,1}, {1,2}, {1}
    return SparseLabelMatrix.from_rows([[0, 1], [1, 2], [1]], 3)


@pytest.fixture
def toy_graph(toy_y):
    return build_cooccurrence(toy_y)


@pytest.fixture
def toy_dataset(toy_y):
    return Dataset(TextCorpus(("mario party 7", "super smash bros", "mario kart")),
                   TextCorpus(("party games", "mario", "fighting")), toy_y, name="toy")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

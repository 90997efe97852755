from fractions import Fraction
from pathlib import Path

import pytest

from hssplab.kmeans import Dataset, load_dataset, save_dataset

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def synthetic_path() -> Path:
    return DATA / "synthetic12.csv"


@pytest.fixture(scope="session")
def synthetic(synthetic_path) -> Dataset:
    return load_dataset(synthetic_path)


@pytest.fixture(scope="session")
def iris_path(tmp_path_factory) -> Path:
    # Iris ships with scikit-learn; the csv keeps the usual 1-decimal layout
    datasets = pytest.importorskip("sklearn.datasets")
    iris = datasets.load_iris()
    pts = [[Fraction(str(round(float(v), 1))) for v in row] for row in iris.data]
    labels = [str(iris.target_names[t]) for t in iris.target]
    path = tmp_path_factory.mktemp("iris") / "iris.csv"
    save_dataset(Dataset(pts, labels, None), path)
    return path


@pytest.fixture(scope="session")
def iris(iris_path) -> Dataset:
    return load_dataset(iris_path)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])

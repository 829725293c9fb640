import numpy as np
import pytest

from rferns.dataset import from_arrays


def tiny_dataset(rng, n, m, n_classes, categorical=True):
    """Random small dataset; roughly a third of columns categorical when allowed."""
    X = rng.normal(size=(n, m)).round(1)
    cats = {}
    if categorical:
        for j in range(m):
            if rng.random() < 0.34:
                levels = int(rng.integers(2, 5))
                X[:, j] = rng.integers(0, levels, size=n)
                cats[j] = levels
    y = rng.integers(0, n_classes, size=n)
    return from_arrays(X, y, categorical=cats, n_classes=n_classes)


@pytest.fixture
def iris_like():
    from rferns.bench import gen_gaussian_classes

    return gen_gaussian_classes(50, 4, 3, 3.0, seed=0).dataset


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])

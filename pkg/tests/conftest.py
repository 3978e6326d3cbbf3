import numpy as np
import pytest

from adamwarmup.train import IdxDataset, load_idx, write_idx


def _synthetic(n=300, side=6, n_classes=3, seed=0):
    # class k lights up a distinct band of rows, plus noise
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_classes, n)
    imgs = rng.integers(0, 60, (n, side, side))
    for k in range(n_classes):
        imgs[labels == k, 2 * k : 2 * k + 2, :] += 180
    return IdxDataset(imgs.astype(np.uint8), labels.astype(np.int64), n_classes)


@pytest.fixture(scope="session")
def tiny_dataset():
    return _synthetic()


@pytest.fixture(scope="session")
def tiny_idx_paths(tmp_path_factory, tiny_dataset):
    d = tmp_path_factory.mktemp("tiny")
    write_idx(d / "images.idx", tiny_dataset.images)
    write_idx(d / "labels.idx", tiny_dataset.labels.astype(np.uint8))
    return d / "images.idx", d / "labels.idx"


@pytest.fixture(scope="session")
def digit_idx_paths(tmp_path_factory):
    """The 5000-image MNIST subset shipped with mlxtend, written as IDX."""
    mlxtend_data = pytest.importorskip("mlxtend.data")
    x, y = mlxtend_data.mnist_data()
    d = tmp_path_factory.mktemp("digits")
    write_idx(d / "images.idx", x.reshape(-1, 28, 28).astype(np.uint8))
    write_idx(d / "labels.idx", y.astype(np.uint8))
    return d / "images.idx", d / "labels.idx"


@pytest.fixture(scope="session")
def digit_dataset(digit_idx_paths):
    return load_idx(*digit_idx_paths)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)

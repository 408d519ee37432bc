import os
from pathlib import Path

import pytest

from formlink.fixtures import fixture_split, write_corpus


@pytest.fixture(scope="session")
def fixture_corpora():
    return fixture_split()


@pytest.fixture(scope="session")
def train_forms(fixture_corpora):
    return fixture_corpora[0]


@pytest.fixture(scope="session")
def test_forms(fixture_corpora):
    return fixture_corpora[1]


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory, test_forms):
    """Test-split fixture corpus written to disk in the annotation schema."""
    directory = tmp_path_factory.mktemp("fixture_corpus")
    write_corpus(test_forms, directory)
    return directory


def funsd_split_dirs() -> tuple[Path, Path] | None:
    """Locate a locally supplied FUNSD dataset, if any.

    Accepts FUNSD_DIR pointing at the official layout
    (training_data/annotations, testing_data/annotations) or at a
    directory with train/ and test/ subdirectories of JSON files.
    """
    root = os.environ.get("FUNSD_DIR")
    if not root:
        return None
    root = Path(root)
    for train, test in (
        (root / "training_data" / "annotations", root / "testing_data" / "annotations"),
        (root / "train", root / "test"),
    ):
        if train.is_dir() and test.is_dir():
            return train, test
    return None


@pytest.fixture
def funsd_dirs():
    dirs = funsd_split_dirs()
    if dirs is None:
        pytest.skip("FUNSD dataset not supplied (set FUNSD_DIR)")
    return dirs

import pytest

from helpers import DATA_DIR


@pytest.fixture
def tiny_path():
    return DATA_DIR / "tiny.jsonl"


@pytest.fixture
def tiny_dataset(tiny_path):
    from pabsa.corpus import load_dataset

    return load_dataset(tiny_path)

import pytest
from fastapi.testclient import TestClient

from polarity_service.app import create_app
from polarity_service.scoring import LexiconScorer


@pytest.fixture
def scorer():
    return LexiconScorer()


@pytest.fixture
def client(scorer):
    return TestClient(create_app(scorer))


@pytest.fixture
def unloaded_client():
    return TestClient(create_app(None))

"""HTTP microservice serving 3-way aspect polarity scores."""

from .app import create_app
from .scoring import LexiconScorer, load_scorer_from_env

__version__ = "0.1.0"

__all__ = ["create_app", "LexiconScorer", "load_scorer_from_env", "__version__"]

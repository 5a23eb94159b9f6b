"""Support-case solution recommendation engine.

Gates incoming cases on single-turn resolvability, distills each case into
one retrieval question, searches multiple document collections with dense
embeddings, re-ranks and deduplicates the links, and generates grounded
answers with an explicit insufficiency escape. Ships with an offline
evaluation harness and a feedback-capturing HTTP service.
"""

from .config import PipelineConfig, validate_config
from .models import Recommendation, RecommendationResult, SupportCase

__all__ = [
    "PipelineConfig",
    "Recommendation",
    "RecommendationResult",
    "SupportCase",
    "validate_config",
]

__version__ = "0.1.0"

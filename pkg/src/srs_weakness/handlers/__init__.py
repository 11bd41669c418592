"""
Handler modules for the srs-weakness MCP tool server
"""

from .base_handler import BaseHandler
from .experiment_handler import ExperimentHandler
from .mapping_handler import MappingHandler
from .prediction_handler import PredictionHandler

__all__ = [
    "BaseHandler",
    "ExperimentHandler",
    "MappingHandler",
    "PredictionHandler",
]

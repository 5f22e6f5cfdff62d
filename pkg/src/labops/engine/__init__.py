"""Query evaluation: the production engine and the naive test oracle."""

from .errors import ExecutionError
from .evaluate import evaluate
from .oracle import oracle_evaluate

__all__ = ["ExecutionError", "evaluate", "oracle_evaluate"]

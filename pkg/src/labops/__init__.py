"""labops: autonomous bottleneck analysis over a lab-operations jobs table.

The pipeline generates analytical questions, synthesizes and validates
constrained SQL, executes it in-process, retries failed queries with
reflection feedback, and emits a narrative report plus charts.
"""

__version__ = "0.1.0"

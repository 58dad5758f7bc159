"""Wildfire containment-duration modeling pipeline.

Ingests CAL FIRE perimeter exports, derives a log-transformed duration
target, and trains/evaluates random-forest, Newton-boosted-tree and LSTM
regressors with day-unit reporting.
"""

__version__ = "0.1.0"

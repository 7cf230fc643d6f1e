"""Market direction classifiers and fee-aware trade simulation for 4h candles."""

__version__ = "0.1.0"

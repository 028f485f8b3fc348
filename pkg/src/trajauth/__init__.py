"""Cross-modal trajectory forecasting and behavioural authentication."""

__version__ = "0.1.0"

"""Price-guided group recommendation: models, training, evaluation and analysis."""

__version__ = "0.1.0"

from .pipeline import (
    evaluation_report,
    gmv_report,
    influence_analysis,
    synthetic_dataset,
    trained_model,
)

__all__ = [
    "evaluation_report",
    "gmv_report",
    "influence_analysis",
    "synthetic_dataset",
    "trained_model",
]

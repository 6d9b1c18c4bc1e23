from .config import DatasetConfig
from .loader import (
    assemble_dataset,
    build_dataset,
    derive_group_interactions,
    load_data_dir,
    load_dataset,
    validate_dataset,
    write_id_maps,
)
from .normalize import normalize_frequency, normalize_price
from .sampling import NegativeSample, sample_negatives
from .synthetic import (
    SyntheticConfig,
    generate_synthetic,
    generate_synthetic_tables,
    write_synthetic,
)
from .types import (
    CatalogItem,
    DataSplit,
    Dataset,
    FeedbackKind,
    GroupDef,
    GroupRatingMode,
    IdMaps,
    Interaction,
    InteractionSet,
    UserProfile,
)

__all__ = [
    "CatalogItem",
    "DataSplit",
    "Dataset",
    "DatasetConfig",
    "FeedbackKind",
    "GroupDef",
    "GroupRatingMode",
    "IdMaps",
    "Interaction",
    "InteractionSet",
    "NegativeSample",
    "SyntheticConfig",
    "UserProfile",
    "assemble_dataset",
    "build_dataset",
    "derive_group_interactions",
    "generate_synthetic",
    "generate_synthetic_tables",
    "load_data_dir",
    "load_dataset",
    "normalize_frequency",
    "normalize_price",
    "sample_negatives",
    "validate_dataset",
    "write_id_maps",
    "write_synthetic",
]

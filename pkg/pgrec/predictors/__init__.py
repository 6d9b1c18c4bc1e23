from .base import Recommender
from .factory import MODEL_KINDS, build_model, load_model, save_model
from .group import GroupContext, GroupRecommender, predict_group, predict_user
from .ncf import NcfMemberRecommender, NcfRecommender, predict_ncf
from .popularity import PopularityRecommender, popularity_rank

__all__ = [
    "MODEL_KINDS",
    "GroupContext",
    "GroupRecommender",
    "NcfMemberRecommender",
    "NcfRecommender",
    "PopularityRecommender",
    "Recommender",
    "build_model",
    "load_model",
    "popularity_rank",
    "predict_group",
    "predict_ncf",
    "predict_user",
    "save_model",
]

"""Shared fixtures: hand-made toy datasets and small synthetic data directories."""

import numpy as np
import pytest

from pgrec.data.loader import assemble_dataset
from pgrec.data.synthetic import (
    SyntheticConfig,
    generate_synthetic,
    generate_synthetic_tables,
    write_synthetic,
)
from pgrec.data.types import DataSplit, FeedbackKind, InteractionSet
from pgrec.predictors.base import Recommender

SMALL_SYNTHETIC = SyntheticConfig(
    n_users=80,
    n_items=80,
    n_groups=4,
    group_size_min=10,
    group_size_max=20,
    events_per_group=25,
    base_rate=3.0,
)


def interactions(entries):
    return InteractionSet.from_entries(entries)


@pytest.fixture
def toy_dataset():
    """5 users, 30 items, 2 groups; enough items for 19 sampled negatives."""
    train_ui = interactions(
        [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (1, 3, 1.0)]
        + [(1, 4, 1.0), (2, 5, 1.0), (3, 6, 1.0), (4, 6, 1.0), (4, 7, 1.0)]
    )
    test_ui = interactions([(0, 8, 1.0), (1, 8, 1.0), (3, 9, 1.0), (4, 9, 1.0), (4, 10, 1.0)])
    train_gi = interactions([(0, 0, 1.0), (1, 6, 1.0)])
    valid_gi = interactions([(0, 2, 1.0)])
    test_gi = interactions([(0, 8, 1.0), (1, 9, 1.0)])
    split = DataSplit(train_ui, test_ui, train_gi, valid_gi, test_gi)
    prices = np.linspace(5.0, 150.0, 30)
    return assemble_dataset(prices, [(0, 1, 2), (3, 4)], split)


@pytest.fixture
def explicit_dataset():
    train_ui = interactions([(0, 0, 4.0), (1, 0, 2.0), (1, 1, 5.0), (2, 1, 3.0)])
    test_ui = interactions([(0, 2, 4.0), (2, 2, 2.0)])
    train_gi = interactions([(0, 0, 3.0), (0, 1, 4.0)])
    valid_gi = interactions([(0, 3, 2.0)])
    test_gi = interactions([(0, 2, 2.0), (0, 4, 5.0)])
    split = DataSplit(train_ui, test_ui, train_gi, valid_gi, test_gi)
    prices = [10.0, 20.0, 30.0, 40.0, 50.0]
    return assemble_dataset(prices, [(0, 1, 2)], split, FeedbackKind.EXPLICIT)


@pytest.fixture(scope="session")
def small_synthetic():
    return generate_synthetic(SMALL_SYNTHETIC, seed=3)


@pytest.fixture
def synthetic_dir(tmp_path):
    tables = generate_synthetic_tables(SMALL_SYNTHETIC, seed=3)
    return write_synthetic(tables, tmp_path / "data", SMALL_SYNTHETIC)


class FixedScores(Recommender):
    """Scores looked up from a (groups × items) table."""

    kind = "fixed"

    def __init__(self, dataset, table):
        super().__init__(None, dataset)
        self.table = np.asarray(table, dtype=np.float64)

    def score_group(self, group_id, items):
        return self.table[group_id, np.asarray(items, dtype=np.int64)]


class RandomScores(Recommender):
    """Independent uniform scores per call; a stand-in for an untrained scorer."""

    kind = "random"

    def __init__(self, dataset, seed=0):
        super().__init__(None, dataset)
        self.rng = np.random.default_rng(seed)

    def score_group(self, group_id, items):
        return self.rng.random(len(items))


@pytest.fixture
def fixed_scores():
    return FixedScores


@pytest.fixture
def random_scores():
    return RandomScores

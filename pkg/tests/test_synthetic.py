import numpy as np
import pytest

from pgrec.data.config import DatasetConfig
from pgrec.data.loader import load_data_dir, read_dataset_conf
from pgrec.data.synthetic import (
    N_TIERS,
    TRUTH_FILE,
    SyntheticConfig,
    generate_synthetic,
    generate_synthetic_tables,
)
from pgrec.data.types import FeedbackKind
from pgrec.errors import InfeasibleConfigError

from .conftest import SMALL_SYNTHETIC


def test_same_seed_same_tables():
    a = generate_synthetic_tables(SMALL_SYNTHETIC, seed=11)
    b = generate_synthetic_tables(SMALL_SYNTHETIC, seed=11)
    assert a.raw.user_item.equals(b.raw.user_item)
    assert a.raw.group_item.equals(b.raw.group_item)
    assert a.truth.equals(b.truth)


def test_truth_matches_group_positives():
    tables = generate_synthetic_tables(SMALL_SYNTHETIC, seed=2)
    group_pairs = set(zip(tables.raw.group_item["group_id"], tables.raw.group_item["item_id"]))
    truth_pairs = set(zip(tables.truth["group_id"], tables.truth["item_id"]))
    assert group_pairs == truth_pairs
    assert set(tables.truth["set_label"]) <= {"A", "B"}


def test_group_source_bought_the_item():
    tables = generate_synthetic_tables(SMALL_SYNTHETIC, seed=2)
    bought = set(zip(tables.raw.user_item["user_id"], tables.raw.user_item["item_id"]))
    members = set(zip(tables.raw.groups["group_id"], tables.raw.groups["user_id"]))
    for row in tables.truth.itertuples():
        assert (row.user_id, row.item_id) in bought
        assert (row.group_id, row.user_id) in members


def test_full_plant_makes_cheap_decile_frequent():
    config = SyntheticConfig(n_users=300, n_items=200, n_groups=6, events_per_group=200, rho=1.0)
    tables = generate_synthetic_tables(config, seed=0)
    items = tables.raw.items.sort_values("price", kind="stable")
    cheapest = set(items["item_id"].iloc[: config.n_items // N_TIERS])
    priciest = set(items["item_id"].iloc[-config.n_items // N_TIERS :])
    truth = tables.truth
    assert truth.loc[truth["item_id"].isin(cheapest), "is_frequent"].all()
    assert 0.25 < truth.loc[truth["item_id"].isin(priciest), "is_frequent"].mean() < 0.75


def test_no_plant_rate_beyond_ramp():
    config = SyntheticConfig(rho=0.8, plant_ramp_deciles=5)
    assert config.planted_rate(0) == pytest.approx(0.8)
    assert config.planted_rate(4) == pytest.approx(0.16)
    assert all(config.planted_rate(k) == 0.0 for k in range(5, N_TIERS))


def test_explicit_ratings_in_range():
    config = SyntheticConfig(
        n_users=60, n_items=40, n_groups=3, group_size_min=5, group_size_max=10,
        events_per_group=20, feedback_kind=FeedbackKind.EXPLICIT,
    )
    tables = generate_synthetic_tables(config, seed=1)
    values = tables.raw.user_item["value"].to_numpy()
    assert values.min() >= 1.0 and values.max() <= 5.0
    group_values = tables.raw.group_item["value"].to_numpy()
    assert np.all(group_values >= 1.0) and np.all(group_values <= 5.0)


@pytest.mark.parametrize(
    "overrides",
    [
        {"n_items": 5},
        {"group_size_min": 30, "group_size_max": 20},
        {"group_size_max": 1000},
        {"rho": 1.5},
    ],
)
def test_infeasible_configs(overrides):
    with pytest.raises(InfeasibleConfigError):
        generate_synthetic_tables(SyntheticConfig(**overrides), seed=0)


def test_written_directory_loads(synthetic_dir):
    assert (synthetic_dir / TRUTH_FILE).is_file()
    assert read_dataset_conf(synthetic_dir)["feedback_kind"] == "implicit"
    dataset = load_data_dir(synthetic_dir, DatasetConfig())
    assert dataset.n_items == SMALL_SYNTHETIC.n_items
    assert len(dataset.split.test_group_item) > 0


def test_generate_synthetic_dataset(small_synthetic):
    assert small_synthetic.n_groups == 4
    assert small_synthetic.alpha.min() >= 0.01
    assert small_synthetic.alpha.max() == pytest.approx(1.0)
    assert small_synthetic.freq.max() == 5.0
    assert generate_synthetic(SMALL_SYNTHETIC, seed=3).digest() == small_synthetic.digest()

import itertools

import numpy as np
import pytest

from pgrec.aggregation import pgusa_weight
from pgrec.analysis import (
    InfluenceRecord,
    chi_square_test,
    curves_frame,
    extract_influence,
    gmv_curve,
    gmv_curves,
    gmv_from_ranking,
    gmv_total,
    label_frequent_buyers,
    price_bucket_report,
    price_bucket_tests,
    rank_profile,
    read_records,
    records_from_frame,
    t_test_two_sample,
    write_records,
)
from pgrec.analysis.gmv import GmvCurve, window_buyers
from pgrec.data.loader import assemble_dataset
from pgrec.data.synthetic import SyntheticConfig, generate_synthetic_tables
from pgrec.data.types import DataSplit, InteractionSet
from pgrec.errors import InsufficientSamplesError, UsageError
from pgrec.predictors import build_model
from pgrec.predictors.base import member_record


@pytest.fixture
def weighted_scores(fixed_scores):
    class WeightedScores(fixed_scores):
        """Fixed scores plus price-guided member weights."""

        supports_weights = True

        def member_weights(self, group_id, item_id):
            members = list(self.dataset.members(group_id))
            weights = pgusa_weight(self.dataset.alpha[item_id], self.dataset.freq[members])
            return member_record(self.dataset, group_id, item_id, np.atleast_1d(weights))

    return WeightedScores


def records(prices, frequent):
    return [
        InfluenceRecord(1, i + 1, float(p), 1, bool(f))
        for i, (p, f) in enumerate(zip(prices, frequent))
    ]


@pytest.mark.parametrize(
    "observed, statistic, rejected",
    [((629, 350), 79.51, True), ((14, 19), 0.76, False), ((50, 50), 0.0, False)],
)
def test_chi_square_examples(observed, statistic, rejected):
    result = chi_square_test(observed)
    assert result.statistic == pytest.approx(statistic, abs=0.01)
    assert result.rejected is rejected
    assert result.expected[0] == sum(observed) / 2


def test_chi_square_is_symmetric():
    assert chi_square_test((30, 12)).statistic == chi_square_test((12, 30)).statistic


def test_chi_square_needs_counts():
    with pytest.raises(InsufficientSamplesError):
        chi_square_test((0, 0))


def test_chi_square_summary():
    text = chi_square_test((629, 350)).summary("low_price")
    assert text.startswith("low_price: observed 629/350")
    assert "reject null" in text
    assert chi_square_test((14, 19)).as_row("x")["rejected"] is False


def test_welch_hand_case():
    result = t_test_two_sample([0.70, 0.72, 0.74], [0.60, 0.62, 0.64])
    assert result.statistic == pytest.approx(6.124, abs=1e-3)
    assert result.significant


def test_welch_identical_and_separated():
    same = t_test_two_sample([0.5, 0.6, 0.7], [0.5, 0.6, 0.7])
    assert same.statistic == 0.0 and not same.significant
    jitter = 1e-9
    apart = t_test_two_sample([1, 1 + jitter, 1 - jitter], [2, 2 + jitter, 2 - jitter])
    assert apart.significant and apart.statistic < 0


def test_welch_zero_variance():
    flat = t_test_two_sample([3, 3], [3, 3])
    assert (flat.statistic, flat.p_value, flat.significant) == (0.0, 1.0, False)
    assert t_test_two_sample([4, 4], [3, 3]).significant


def test_welch_needs_two_samples():
    with pytest.raises(InsufficientSamplesError):
        t_test_two_sample([0.5], [0.4, 0.6])


def frequency_dataset():
    """Group 1 members buy {1, 1, 4} items in training, group 2 members {1, 1, 5}."""
    entries = [(0, 0), (1, 1), (2, 0), (2, 1), (2, 2), (2, 3)]
    entries += [(3, 0), (4, 1), (5, 0), (5, 1), (5, 2), (5, 3), (5, 4)]
    train = InteractionSet.from_entries([(u, i, 1.0) for u, i in entries])
    empty = InteractionSet.empty()
    split = DataSplit(train, empty, empty, empty, empty)
    return assemble_dataset(np.arange(1.0, 7.0), [(0, 1, 2), (3, 4, 5)], split)


def test_frequent_buyer_threshold_is_strict():
    labels = label_frequent_buyers(frequency_dataset())
    assert labels[0] == {0: False, 1: False, 2: False}
    assert labels[1] == {3: False, 4: False, 5: True}


def test_equal_counts_have_no_frequent_buyers():
    train = InteractionSet.from_entries([(u, i, 1.0) for u in range(3) for i in (u, u + 1)])
    empty = InteractionSet.empty()
    dataset = assemble_dataset([1.0] * 4, [(0, 1, 2)], DataSplit(train, empty, empty, empty, empty))
    assert label_frequent_buyers(dataset) == {0: {0: False, 1: False, 2: False}}


def test_extract_influence_keeps_top_ranked(toy_dataset, weighted_scores):
    table = np.zeros((2, 30))
    for g, i in toy_dataset.split.test_group_item.pairs():
        table[g, i] = 1.0
    found, weights = extract_influence(weighted_scores(toy_dataset, table), toy_dataset)
    assert [(r.group_id, r.item_id) for r in found] == [(1, 9), (2, 10)]
    # the heaviest buyer of each group, in original ids
    assert [r.most_influential_user for r in found] == [2, 5]
    assert not any(r.is_frequent_buyer for r in found)
    assert {r.set_label for r in found} == {"B"}
    assert len(weights) == 2


def test_extract_influence_without_hits(toy_dataset, weighted_scores):
    table = np.ones((2, 30))
    for g, i in toy_dataset.split.test_group_item.pairs():
        table[g, i] = -1.0
    found, _ = extract_influence(weighted_scores(toy_dataset, table), toy_dataset)
    assert found == []


def test_single_member_groups_always_pick_that_member(weighted_scores):
    empty = InteractionSet.empty()
    train = InteractionSet.from_entries([(0, 0, 1.0), (1, 1, 1.0), (1, 2, 1.0)])
    test_gi = InteractionSet.from_entries([(0, 5, 1.0), (1, 6, 1.0)])
    split = DataSplit(train, empty, empty, empty, test_gi)
    dataset = assemble_dataset(np.arange(1.0, 31.0), [(0,), (1,)], split)
    table = np.zeros((2, 30))
    table[0, 5] = table[1, 6] = 1.0
    found, _ = extract_influence(weighted_scores(dataset, table), dataset)
    assert [r.most_influential_user for r in found] == [1, 2]


def test_extract_influence_needs_weights(toy_dataset):
    with pytest.raises(UsageError):
        extract_influence(build_model("ncf", toy_dataset, d=4), toy_dataset)


def test_all_frequent_tails_score_their_size():
    prices = np.arange(1.0, 21.0)
    low, high = price_bucket_tests(records(prices, [True] * 20))
    assert low.observed == (2, 0) and low.statistic == pytest.approx(2.0)
    assert high.observed == (2, 0) and high.statistic == pytest.approx(2.0)


def test_tails_are_inclusive():
    low, high = price_bucket_tests(records([5.0] * 4, [True, False, True, False]))
    assert sum(low.observed) == 4 and sum(high.observed) == 4


def test_no_records():
    with pytest.raises(InsufficientSamplesError):
        price_bucket_tests([])


def truth_records(rho):
    config = SyntheticConfig(n_users=300, n_items=200, n_groups=6, events_per_group=200, rho=rho)
    return records_from_frame(generate_synthetic_tables(config, seed=0).truth)


def test_planted_signal_rejects_low_tail_only():
    low, high = price_bucket_tests(truth_records(1.0))
    assert low.rejected
    assert not high.rejected


def test_no_signal_rejects_neither_tail():
    low, high = price_bucket_tests(truth_records(0.0))
    assert not low.rejected
    assert not high.rejected


def test_price_bucket_report():
    prices = np.arange(1.0, 21.0)
    report = price_bucket_report(records(prices, [p <= 4 for p in prices]), n_buckets=5)
    assert report["n_items"].tolist() == [4] * 5
    assert report["n_a"].tolist() == [4, 0, 0, 0, 0]
    assert report["ratio_a"].iloc[0] == 1.0
    assert report["price_low"].iloc[-1] == 17.0


def test_records_survive_a_file(tmp_path):
    original = records([3.5, 8.0], [True, False])
    path = write_records(original, tmp_path / "influence_records.tsv")
    assert read_records(path) == original


def gmv_dataset():
    """Group 1 bought item 3 (price 100) in the test window through two members."""
    train = InteractionSet.from_entries([(0, 0, 1.0), (1, 1, 1.0), (2, 3, 1.0)])
    test_ui = InteractionSet.from_entries([(0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0)])
    test_gi = InteractionSet.from_entries([(0, 2, 1.0)])
    empty = InteractionSet.empty()
    split = DataSplit(train, test_ui, empty, empty, test_gi)
    return assemble_dataset([10.0, 20.0, 100.0, 30.0, 40.0], [(0, 1, 2), (3,)], split)


def test_gmv_jumps_at_the_true_item(fixed_scores):
    dataset = gmv_dataset()
    assert window_buyers(dataset, 0) == {2: 2}
    model = fixed_scores(dataset, [[0.9, 0.8, 0.7, 0.1, 0.0], [0.0] * 5])
    curve = gmv_curve(model, dataset, 0)
    np.testing.assert_array_equal(curve.cumulative_gmv, [0, 0, 200, 200, 200])
    np.testing.assert_array_equal(gmv_curve(model, dataset, 0, max_rank=2).cumulative_gmv, [0, 0])


def test_gmv_flat_without_true_items(fixed_scores):
    dataset = gmv_dataset()
    model = fixed_scores(dataset, np.zeros((2, 5)))
    assert window_buyers(dataset, 1) == {}
    assert not gmv_curve(model, dataset, 1).cumulative_gmv.any()


def test_perfect_ranking_dominates():
    gains = {0: 50.0, 2: 200.0, 3: 20.0, 5: 80.0}
    perfect = gmv_from_ranking(sorted(range(6), key=lambda i: -gains.get(i, 0.0)), gains)
    for order in itertools.permutations(range(6)):
        assert np.all(perfect >= gmv_from_ranking(order, gains))


def test_gmv_totals_and_frame(fixed_scores):
    dataset = gmv_dataset()
    model = fixed_scores(dataset, [[0.9, 0.8, 0.7, 0.1, 0.0], [0.0] * 5])
    curves = gmv_curves(model, dataset, threads=2)
    np.testing.assert_array_equal(gmv_total(curves), [0, 0, 200, 200, 200])
    short = [GmvCurve(0, np.array([1.0, 3.0])), GmvCurve(1, np.array([2.0]))]
    np.testing.assert_array_equal(gmv_total(short), [3.0, 5.0])
    frame = curves_frame(curves, dataset)
    assert list(frame.columns) == ["group_id", "rank", "cumulative_gmv"]
    assert frame["group_id"].tolist() == ["1"] * 5 + ["2"] * 5 + ["all"] * 5


def test_rank_profile(fixed_scores):
    dataset = gmv_dataset()
    model = fixed_scores(dataset, [[0.9, 0.8, 0.7, 0.1, 0.0], [0.0] * 5])
    profile = rank_profile(model, dataset, 0)
    assert profile.to_dict("records") == [
        {"rank": 3, "item_id": 3, "price": 100.0, "popularity": 2}
    ]


def test_full_depth_gmv_ignores_the_ranking(small_synthetic, fixed_scores):
    dataset = small_synthetic
    rng = np.random.default_rng(8)
    for group in range(dataset.n_groups):
        expected = sum(
            dataset.prices[item] * buyers for item, buyers in window_buyers(dataset, group).items()
        )
        for _ in range(3):
            model = fixed_scores(dataset, rng.random((dataset.n_groups, dataset.n_items)))
            curve = gmv_curve(model, dataset, group, max_rank=dataset.n_items)
            assert len(curve.cumulative_gmv) == dataset.n_items
            assert curve.cumulative_gmv[-1] == pytest.approx(expected, rel=1e-12, abs=1e-9)

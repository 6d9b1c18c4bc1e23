import numpy as np
import pytest

from pgrec.aggregation import make_aggregator, pgusa_weight
from pgrec.data.loader import assemble_dataset
from pgrec.data.types import DataSplit, InteractionSet
from pgrec.diagnostics import check_predictor_gradients
from pgrec.errors import CheckpointMismatchError, DanglingReferenceError, UsageError
from pgrec.predictors import (
    MODEL_KINDS,
    GroupContext,
    build_model,
    load_model,
    popularity_rank,
    predict_group,
    predict_ncf,
    predict_user,
    save_model,
)
from pgrec.predictors.factory import MODEL_CARD_FILE
from pgrec.predictors.popularity import training_interactions


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_every_kind_scores_candidates(toy_dataset, kind):
    model = build_model(kind, toy_dataset, d=4, seed=1)
    scores = model.score_group(0, np.arange(toy_dataset.n_items))
    assert scores.shape == (toy_dataset.n_items,)
    assert np.all(np.isfinite(scores))
    pairs = model.score_pairs(np.array([0, 0, 1]), np.array([3, 7, 3]))
    np.testing.assert_allclose(pairs[:2], scores[[3, 7]])


def test_unknown_kind(toy_dataset):
    with pytest.raises(UsageError):
        build_model("svd", toy_dataset)


def test_dangling_ids(toy_dataset):
    model = build_model("pgusa", toy_dataset, d=4)
    with pytest.raises(DanglingReferenceError):
        model.score_group(5, np.array([0]))
    with pytest.raises(DanglingReferenceError):
        model.score_group(0, np.array([0, 30]))
    with pytest.raises(DanglingReferenceError):
        predict_user(model.params, 9, 0)


def test_predict_group_weights_follow_price_and_frequency(toy_dataset):
    model = build_model("pgusa", toy_dataset, d=4, seed=2)
    context = GroupContext.from_dataset(toy_dataset)
    item = 0
    y, weights, _ = predict_group(model.params, context, 0, item, model.aggregator)
    members = list(toy_dataset.members(0))
    expected = pgusa_weight(toy_dataset.alpha[item], toy_dataset.freq[members], 5.0)
    np.testing.assert_allclose(weights, expected)
    assert y == pytest.approx(float(model.score_group(0, np.array([item]))[0]))


def test_group_embedding_shifts_only_its_group(toy_dataset):
    model = build_model("pgusa", toy_dataset, d=4, seed=2)
    model.params.params["mlp.0.b"][...] = 1.0
    items = np.array([4])
    before = [model.score_group(g, items)[0] for g in (0, 1)]
    model.params.params["group_emb"][0] += 0.5
    after = [model.score_group(g, items)[0] for g in (0, 1)]
    assert before[0] != after[0]
    assert before[1] == after[1]


def test_user_branch_shares_the_head(toy_dataset):
    model = build_model("pgusa", toy_dataset, d=4, seed=3)
    y_before, _ = predict_user(model.params, 0, 1)
    model.params.params["mlp.0.b"] += 0.1
    y_after, _ = predict_user(model.params, 0, 1)
    assert y_before != y_after


def test_member_weights_record(toy_dataset):
    model = build_model("pgusa", toy_dataset, d=4, seed=0)
    record = model.member_weights(0, 2)
    assert [u for u, _ in record.weights] == [0, 1, 2]
    # user 1 has the most training purchases
    assert record.most_influential() == 1


def test_agree_weights_are_a_distribution(toy_dataset):
    model = build_model("agree", toy_dataset, d=4, seed=0)
    record = model.member_weights(1, 6)
    assert sum(w for _, w in record.weights) == pytest.approx(1.0)


def test_models_without_weights(toy_dataset):
    for kind in ("ncf", "ncf-avg", "popularity"):
        model = build_model(kind, toy_dataset, d=4)
        assert not model.supports_weights
        with pytest.raises(UsageError):
            model.member_weights(0, 0)


def test_ncf_groups_are_virtual_users(toy_dataset):
    model = build_model("ncf", toy_dataset, d=4, seed=5)
    direct = predict_ncf(model.params, toy_dataset.n_users + 1, 3, implicit=True)
    assert model.score_group(1, np.array([3]))[0] == pytest.approx(direct)
    assert 0.0 < direct < 1.0
    with pytest.raises(DanglingReferenceError):
        predict_ncf(model.params, toy_dataset.n_users + toy_dataset.n_groups, 0)


def test_ncf_member_aggregation(toy_dataset):
    avg = build_model("ncf-avg", toy_dataset, d=4, seed=5)
    exp = build_model("ncf-exp", toy_dataset, d=4, seed=5, params=avg.params)
    items = np.array([0, 8])
    member_scores = avg.member_scores(0, items)
    np.testing.assert_allclose(avg.score_group(0, items), member_scores.mean(axis=0))
    freqs = toy_dataset.freq[list(toy_dataset.members(0))]
    np.testing.assert_allclose(exp.score_group(0, items), freqs @ member_scores / freqs.sum())
    assert not avg.trains_group_pass and avg.trains_user_pass


def test_popularity_rank_ties_by_id():
    train = InteractionSet.from_entries(
        [(0, 2, 1.0), (1, 2, 1.0), (0, 5, 1.0), (1, 5, 1.0), (2, 1, 1.0)]
    )
    assert popularity_rank(train, [1, 5, 2, 9]) == [2, 5, 1, 9]
    assert popularity_rank(train, []) == []


def test_popularity_scores_count_training_purchases(toy_dataset):
    # Items 0 and 6: two member purchases and one group purchase each.
    model = build_model("popularity", toy_dataset)
    scores = model.score_group(0, np.array([0, 6, 8]))
    np.testing.assert_array_equal(scores, [3.0, 3.0, 0.0])
    np.testing.assert_array_equal(model.score_group(1, np.array([0, 6, 8])), scores)
    assert model.parameter_count() == 0


def test_save_and_load_round_trip(toy_dataset, tmp_path):
    model = build_model("pgusa", toy_dataset, d=4, beta=3.0, hidden_sizes=(6, 2), seed=7)
    path = save_model(model, tmp_path / "model.json", {"seed": 7})
    loaded = load_model(path, toy_dataset)
    assert loaded.params.equals(model.params)
    assert loaded.aggregator.beta == 3.0
    items = np.arange(10)
    np.testing.assert_array_equal(loaded.score_group(1, items), model.score_group(1, items))
    card = dict(
        line.split("\t") for line in (tmp_path / MODEL_CARD_FILE).read_text().splitlines()[1:]
    )
    assert card["model_kind"] == "pgusa"
    assert card["aggregator"] == "pgusa"


def test_load_rejects_other_dataset(toy_dataset, explicit_dataset, tmp_path):
    path = save_model(build_model("pgusa", toy_dataset, d=4), tmp_path / "model.json")
    with pytest.raises(CheckpointMismatchError):
        load_model(path, explicit_dataset)


def test_parameter_counts(toy_dataset):
    model = build_model("pgusa", toy_dataset, d=4)
    n, m, s = toy_dataset.n_users, toy_dataset.n_items, toy_dataset.n_groups
    assert model.embedding_parameter_count() == 4 * (n + m + s)
    head = 12 * 4 + 4 + 4 * 1 + 1
    assert model.parameter_count() == 4 * (n + m + s) + head
    agree = build_model("agree", toy_dataset, d=4)
    assert agree.parameter_count() == model.parameter_count() + 8 * 4 + 4 + 4


def test_make_aggregator_matches_model(toy_dataset):
    assert build_model("pgusa+agree", toy_dataset, d=4).aggregator.name == "pgusa+vanilla"
    assert make_aggregator("average").name == "average"


@pytest.mark.parametrize("kind", ["pgusa", "agree", "average", "ncf"])
def test_gradients_match_finite_differences(kind):
    report = check_predictor_gradients(kind)
    assert report.passed, report.failures[:3]
    assert report.n_checked > 0


def test_corrupted_backward_fails_grad_check():
    assert not check_predictor_gradients("pgusa", corrupt=True).passed


def test_grad_check_needs_both_passes():
    with pytest.raises(UsageError):
        check_predictor_gradients("ncf-avg")


def zeroed(model):
    for value in model.params.params.values():
        value.fill(0.0)
    return model


def test_zero_parameters_score_zero(toy_dataset):
    model = zeroed(build_model("pgusa", toy_dataset, d=4))
    np.testing.assert_array_equal(model.score_group(0, np.arange(5)), np.zeros(5))
    assert predict_user(model.params, 2, 3)[0] == 0.0
    ncf = zeroed(build_model("ncf", toy_dataset, d=4))
    assert predict_ncf(ncf.params, 0, 0, implicit=True) == 0.5


def test_single_member_attention_equals_user_branch():
    empty = InteractionSet.empty()
    train = InteractionSet.from_entries([(0, 0, 1.0), (1, 1, 1.0), (1, 2, 1.0)])
    split = DataSplit(train, empty, empty, empty, empty)
    dataset = assemble_dataset([1.0, 2.0, 3.0], [(1,)], split)
    model = build_model("agree", dataset, d=3, seed=4)
    model.params.params["group_emb"][...] = 0.0
    for item in range(3):
        y, _, _ = predict_group(model.params, model.context, 0, item, model.aggregator)
        assert y == pytest.approx(predict_user(model.params, 1, item)[0])


def test_hand_computed_scalar_model():
    empty = InteractionSet.empty()
    train = InteractionSet.from_entries([(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)])
    split = DataSplit(train, empty, empty, empty, empty)
    dataset = assemble_dataset([10.0, 100.0], [(0, 1)], split)
    model = build_model("pgusa", dataset, d=1, hidden_sizes=(1,), beta=5.0)
    p = model.params.params
    p["user_emb"][:, 0] = [1.0, -1.0]
    p["item_emb"][:, 0] = [2.0, 0.5]
    p["group_emb"][0, 0] = 0.5
    p["mlp.0.w"][:, 0] = [1.0, 1.0, 1.0]
    p["mlp.0.b"][0, 0] = 0.0
    p["mlp.1.w"][0, 0] = 2.0
    p["mlp.1.b"][0, 0] = 1.0
    # freqs are [5, 0]: user 0 bought two items, user 1 one.
    f = 4.9665 * 1.0 + 2.5 * -1.0 + 0.5
    expected = 2.0 * max(0.0, f + 2.0 + 2.0 * f) + 1.0
    assert model.score_group(0, np.array([0]))[0] == pytest.approx(expected, abs=1e-3)
    u_expected = 2.0 * max(0.0, 1.0 + 2.0 + 2.0) + 1.0
    assert predict_user(model.params, 0, 0)[0] == pytest.approx(u_expected)


def test_group_and_user_branches_share_mlp_arrays(toy_dataset):
    model = build_model("pgusa", toy_dataset, d=4, seed=1)
    _, group_cache = model.group_forward(np.array([0]), np.array([1]))
    _, user_cache = model.user_forward(np.array([0]), np.array([1]))
    before = model.score_group(0, np.array([1]))[0]
    head = model.params["mlp.1.b"]
    head += 0.3
    assert model.params["mlp.1.b"] is head
    assert model.score_group(0, np.array([1]))[0] != before
    assert group_cache.mlp.activations[0].shape == user_cache.mlp.activations[0].shape


def test_ncf_doubles_embedding_parameters(toy_dataset):
    pgusa = build_model("pgusa", toy_dataset, d=4)
    ncf = build_model("ncf", toy_dataset, d=4)
    assert ncf.params["ncf.gmf_user"].shape[0] == toy_dataset.n_users + toy_dataset.n_groups
    assert ncf.embedding_parameter_count() == 2 * pgusa.embedding_parameter_count()


def test_popularity_model_matches_popularity_rank(small_synthetic):
    model = build_model("popularity", small_synthetic)
    items = np.arange(small_synthetic.n_items)
    expected = popularity_rank(training_interactions(small_synthetic), items)
    scores = model.score_group(0, items)
    assert items[np.lexsort((items, -scores))].tolist() == expected
    oracle = np.zeros(small_synthetic.n_items)
    for split in (small_synthetic.split.train_user_item, small_synthetic.split.train_group_item):
        for item in split.cols.tolist():
            oracle[item] += 1
    np.testing.assert_array_equal(scores, oracle)

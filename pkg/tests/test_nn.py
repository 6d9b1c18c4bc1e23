import json

import numpy as np
import pytest

from pgrec.errors import CheckpointMismatchError, NonFiniteError
from pgrec.nn import (
    MlpSpec,
    ParamStore,
    grad_check,
    init_params,
    load_checkpoint,
    mlp_backward,
    mlp_forward,
    rmsprop_step,
    save_checkpoint,
)


def linear_store(weights, bias=0.0):
    store = ParamStore()
    store.add("mlp.0.w", np.asarray(weights, dtype=np.float64).reshape(-1, 1))
    store.add("mlp.0.b", [[bias]])
    return store


def test_init_is_seeded():
    spec = MlpSpec.scoring_head(4)
    a = init_params(5, 7, 2, 4, spec, seed=3)
    b = init_params(5, 7, 2, 4, spec, seed=3)
    c = init_params(5, 7, 2, 4, spec, seed=4)
    assert a.equals(b)
    assert not a.equals(c)
    assert a.shapes()["mlp.0.w"] == (12, 4)
    assert a.shapes()["mlp.1.w"] == (4, 1)
    assert not a["mlp.0.b"].any()


def test_init_with_attention_and_bounds():
    store = init_params(10, 20, 3, 8, MlpSpec.scoring_head(8, (16, 4)), seed=0, attention=True)
    limit = np.sqrt(6.0 / (20 + 8))
    assert np.abs(store["item_emb"]).max() <= limit
    assert store.shapes()["att.w"] == (16, 8)
    assert store.shapes()["mlp.2.w"] == (4, 1)


def test_head_must_take_three_d_inputs():
    with pytest.raises(ValueError):
        init_params(2, 2, 1, 4, MlpSpec((8, 4, 1)), seed=0)
    with pytest.raises(ValueError):
        MlpSpec((4,))


def test_zero_weights_give_zero():
    store = ParamStore()
    store.add("mlp.0.w", np.zeros((6, 2)))
    store.add("mlp.0.b", np.zeros((1, 2)))
    store.add("mlp.1.w", np.zeros((2, 1)))
    store.add("mlp.1.b", np.zeros((1, 1)))
    y, _ = mlp_forward(store, np.arange(6.0))
    assert y == 0.0


def test_unit_weight_projects_input():
    x = np.array([0.5, -2.0, 7.0])
    y, _ = mlp_forward(linear_store([0.0, 1.0, 0.0]), x)
    assert y == -2.0


def test_batch_forward_matches_single():
    store = init_params(3, 3, 1, 2, MlpSpec.scoring_head(2), seed=1, linear_std=0.5)
    x = np.random.default_rng(0).normal(size=(4, 6))
    batch, _ = mlp_forward(store, x)
    singles = [mlp_forward(store, row)[0] for row in x]
    np.testing.assert_allclose(batch, singles)


def test_non_finite_input_raises():
    with pytest.raises(NonFiniteError):
        mlp_forward(linear_store([1.0, 1.0]), np.array([np.nan, 1.0]))


def test_zero_upstream_leaves_gradients_zero():
    store = init_params(3, 3, 1, 2, MlpSpec.scoring_head(2), seed=1)
    _, cache = mlp_forward(store, np.ones(6))
    mlp_backward(store, cache, 0.0)
    assert all(not g.any() for g in store.grads.values())


def test_linear_layer_input_gradient_is_weight_row():
    weights = np.array([0.3, -1.2, 2.0])
    store = linear_store(weights)
    _, cache = mlp_forward(store, np.array([1.0, 2.0, 3.0]))
    dx = mlp_backward(store, cache, 2.0)
    np.testing.assert_allclose(dx, 2.0 * weights)
    np.testing.assert_allclose(store.grad("mlp.0.w")[:, 0], [2.0, 4.0, 6.0])
    assert store.grad("mlp.0.b")[0, 0] == 2.0


def test_backward_accumulates_across_calls():
    x = np.random.default_rng(2).normal(size=(4, 6))
    twice = init_params(3, 3, 1, 2, MlpSpec.scoring_head(2), seed=1, linear_std=0.5)
    once = init_params(3, 3, 1, 2, MlpSpec.scoring_head(2), seed=1, linear_std=0.5)
    _, cache = mlp_forward(twice, x)
    dx = mlp_backward(twice, cache, np.ones(4))
    mlp_backward(twice, cache, np.ones(4))
    _, cache = mlp_forward(once, x)
    dx2 = mlp_backward(once, cache, np.full(4, 2.0))
    np.testing.assert_allclose(dx2, 2.0 * dx, rtol=1e-12)
    for name, grad in once.grads.items():
        np.testing.assert_allclose(twice.grads[name], grad, rtol=1e-12, atol=1e-15)
    assert any(g.any() for g in once.grads.values())


def test_rmsprop_zero_gradient_keeps_parameters():
    store = ParamStore()
    store.add("theta", [[1.5, -0.5]])
    rmsprop_step(store, 0.01)
    np.testing.assert_array_equal(store["theta"], [[1.5, -0.5]])
    assert store.step_count == 1


def test_rmsprop_first_step():
    store = ParamStore()
    store.add("theta", [[0.0]])
    store.grads["theta"][...] = 1.0
    rmsprop_step(store, 0.01)
    assert store["theta"][0, 0] == pytest.approx(-0.01 / np.sqrt(0.1), rel=1e-6)
    assert store.sq_avg["theta"][0, 0] == pytest.approx(0.1)
    assert not store.grad("theta").any()


def test_rmsprop_step_approaches_learning_rate():
    store = ParamStore()
    store.add("theta", [[0.0]])
    for _ in range(200):
        store.grads["theta"][...] = 1.0
        rmsprop_step(store, 0.01)
    store.grads["theta"][...] = 1.0
    before = store["theta"][0, 0]
    rmsprop_step(store, 0.01)
    assert before - store["theta"][0, 0] == pytest.approx(0.01, rel=1e-3)


def test_rmsprop_keeps_array_identity():
    store = ParamStore()
    theta = store.add("theta", [[1.0]])
    store.grads["theta"][...] = 0.5
    rmsprop_step(store, 0.1)
    assert store["theta"] is theta


def test_copy_and_assign():
    store = init_params(3, 3, 1, 2, MlpSpec.scoring_head(2), seed=0)
    snapshot = store.copy()
    store.params["item_emb"] += 1.0
    assert not store.equals(snapshot)
    emb = store["item_emb"]
    store.assign(snapshot)
    assert store.equals(snapshot)
    assert store["item_emb"] is emb


def test_grad_check_quadratic():
    store = ParamStore()
    store.add("theta", [[0.3, -1.1], [2.0, 0.7]])

    def closure(params):
        theta = params["theta"]
        params.grads["theta"] += theta
        return 0.5 * float(np.sum(theta * theta))

    report = grad_check(closure, store)
    assert report.passed
    assert report.n_checked == 4
    assert report.max_rel_error < 1e-6


def test_grad_check_catches_sign_flip():
    store = ParamStore()
    store.add("theta", [[0.3, -1.1]])

    def closure(params):
        theta = params["theta"]
        params.grads["theta"] -= theta
        return 0.5 * float(np.sum(theta * theta))

    report = grad_check(closure, store)
    assert not report.passed
    assert len(report.failures) == 2
    assert dict(report.rows())["passed"] == "false"


def test_checkpoint_is_byte_stable(tmp_path):
    store = init_params(4, 5, 2, 3, MlpSpec.scoring_head(3), seed=2)
    a = save_checkpoint(tmp_path / "a.json", store, {"kind": "pgusa"}, "abc")
    b = save_checkpoint(tmp_path / "b.json", store.copy(), {"kind": "pgusa"}, "abc")
    assert a.read_bytes() == b.read_bytes()
    loaded, meta = load_checkpoint(a, expected_id_map_hash="abc", expected_shapes=store.shapes())
    assert loaded.equals(store)
    assert meta == {"kind": "pgusa"}


def test_checkpoint_mismatches(tmp_path):
    store = init_params(4, 5, 2, 3, MlpSpec.scoring_head(3), seed=2)
    path = save_checkpoint(tmp_path / "model.json", store, {}, "abc")
    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(path, expected_id_map_hash="def")
    shapes = dict(store.shapes(), item_emb=(6, 3))
    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(path, expected_shapes=shapes)

    body = json.loads(path.read_text())
    body["version"] = 99
    path.write_text(json.dumps(body))
    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(path)
    path.write_text("{not json")
    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(path)

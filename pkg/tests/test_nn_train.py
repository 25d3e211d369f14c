import numpy as np
import pytest

from cogstate.errors import TrainingDivergenceError
from cogstate.nn import (
    Adam,
    TrainConfig,
    accuracy_of,
    build_model,
    mlp_spec,
    predict_probs,
    train,
)


def toy_separable_dataset(seed=0, per_class=20, c=2, w=5):
    """Three well-separated Gaussian blobs in epoch-shaped tensors."""
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for cls, center in enumerate((-4.0, 0.0, 4.0)):
        blob = center + 0.3 * rng.standard_normal((per_class, 1, c, w))
        xs.append(blob)
        ys.append(np.full(per_class, cls))
    return np.concatenate(xs), np.concatenate(ys)


def test_linearly_separable_mlp_reaches_99pct():
    x, y = toy_separable_dataset()
    model = build_model(mlp_spec(2, 5, seed=1))
    result = train(model, x, y, TrainConfig(batch_size=10, epochs=200, seed=2))
    assert result.final_train_acc >= 0.99
    probs = predict_probs(model, x)
    assert accuracy_of(probs, y) >= 0.99


def test_zero_learning_rate_keeps_parameters():
    x, y = toy_separable_dataset(seed=3)
    # dropout off so frozen parameters imply an exactly flat loss curve
    model = build_model(mlp_spec(2, 5, dropout=0.0, seed=4))
    before = {k: v.copy() for k, v in model.params().items()}
    result = train(model, x, y, TrainConfig(batch_size=10, epochs=5, learning_rate=0.0, seed=5))
    for name, arr in model.params().items():
        assert np.array_equal(arr, before[name])
    losses = [row["train_loss"] for row in result.curves]
    assert max(losses) - min(losses) < 1e-12


def test_same_seed_bitwise_identical_curves_and_params():
    x, y = toy_separable_dataset(seed=6)

    def run():
        model = build_model(mlp_spec(2, 5, seed=7))
        res = train(model, x, y, TrainConfig(batch_size=10, epochs=10, seed=8),
                    val_x=x[:12], val_y=y[:12])
        return res.curves, {k: v.copy() for k, v in model.params().items()}

    curves_a, params_a = run()
    curves_b, params_b = run()
    assert curves_a == curves_b
    for name in params_a:
        assert np.array_equal(params_a[name], params_b[name])


def test_divergence_detected():
    x, y = toy_separable_dataset(seed=9)
    model = build_model(mlp_spec(2, 5, seed=10))
    with pytest.raises(TrainingDivergenceError, match="epoch"):
        train(model, x, y, TrainConfig(batch_size=10, epochs=50, learning_rate=1e18, seed=11))


def test_curves_schema():
    x, y = toy_separable_dataset(seed=12, per_class=10)
    model = build_model(mlp_spec(2, 5, seed=13))
    res = train(model, x, y, TrainConfig(batch_size=10, epochs=3, seed=14),
                val_x=x, val_y=y)
    assert [row["epoch"] for row in res.curves] == [0, 1, 2]
    for row in res.curves:
        assert set(row) == {"epoch", "train_loss", "train_acc", "val_loss", "val_acc"}
        assert row["val_acc"] is not None


def test_zero_input_batch_gradients():
    # With zero inputs, first-layer weight gradients vanish and the final
    # bias gradient equals the summed softmax residual.
    from cogstate.nn import cce_loss

    model = build_model(mlp_spec(2, 5, seed=15))
    x = np.zeros((6, 1, 2, 5))
    y = np.array([0, 1, 2, 0, 1, 2])
    model.zero_grads()
    probs = model.forward(x, training=False)
    loss, dlogits = cce_loss(probs, y)
    model.backward_from_logits(dlogits)
    grads = model.grads()
    assert np.allclose(grads["dense1.w"], 0.0)
    onehot = np.zeros((6, 3))
    onehot[np.arange(6), y] = 1.0
    expected_bias = ((probs - onehot) / 6.0).sum(axis=0)
    last_bias = [n for n in grads if n.endswith(".b")][-1]
    assert np.allclose(grads["dense3.b"], expected_bias, atol=1e-15)


def test_adam_matches_reference_single_step():
    # One Adam step against the textbook update formula.
    p = {"w": np.array([1.0, -2.0])}
    opt = Adam(p, lr=0.1, betas=(0.9, 0.999), eps=1e-8)
    g = {"w": np.array([0.5, -1.5])}
    opt.step(g)
    m = 0.1 * np.array([0.5, -1.5])
    v = 0.001 * np.array([0.25, 2.25])
    mhat = m / (1 - 0.9)
    vhat = v / (1 - 0.999)
    expected = np.array([1.0, -2.0]) - 0.1 * mhat / (np.sqrt(vhat) + 1e-8)
    assert np.allclose(p["w"], expected, atol=1e-15)

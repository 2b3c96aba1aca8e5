import numpy as np
import pytest

import photorc


def test_encoding_window():
    bits = photorc.encode_scalar(0.5)
    assert len(bits) == 10
    assert 2 <= sum(bits) <= 5
    assert photorc.half_width(10) == 0.225
    with pytest.raises(photorc.DomainError):
        photorc.encode_scalar(1.5)


def test_schedules():
    assert photorc.allocate_neurons(500, 5) == [250, 100, 75, 50, 25]
    assert photorc.allocate_neurons(500, 5, strategy="increasing") == [25, 50, 75, 100, 250]
    assert photorc.leakage_schedule(0.95, 0.65, 5) == [0.95, 0.875, 0.80, 0.725, 0.65]
    with pytest.raises(photorc.AllocationError):
        photorc.allocate_neurons(100, 5)


def test_propagate_zero_and_nonnegative():
    assert photorc.propagate([0] * 8, 3, 8) == [0.0] * 8
    out = photorc.propagate([1, 0, 1, 1, 0, 0, 1, 0], 3, 8)
    assert min(out) >= 0.0


def test_ridge_readout_round_trip():
    rng = np.random.default_rng(0)
    # Classes cycle every three columns so each CV fold sees every class.
    labels = [(i // 3) % 3 for i in range(60)]
    means = rng.normal(size=(5, 3))
    states = np.stack([means[:, c] + 0.1 * rng.normal(size=5) for c in labels], axis=1)
    model = photorc.train_ridge(states, labels, 3, 1e-3)
    assert model.weights.shape == (3, 5)
    assert model.predict(states) == labels
    back = photorc.ReadoutModel.load(model.save())
    assert np.array_equal(back.weights, model.weights)
    lam, acc = photorc.select_lambda(states, labels, 3, [1e-3, 1e-1])
    assert lam == 1e-1 and acc == [1.0, 1.0]


def test_reservoir_runs_and_is_bounded():
    cfg = photorc.DeepConfig()
    cfg.depth = 2
    cfg.total_neurons = 100
    cfg.bias_width = 40
    res = photorc.DeepReservoir(cfg, 3)
    rng = np.random.default_rng(1)
    warm = [rng.uniform(size=(6, 3)) for _ in range(32)]
    with pytest.raises(photorc.StateError):
        res.run_sequence(warm[0])
    res.calibrate(warm)
    feats = res.run_sequence(warm[0])
    assert feats.shape == (res.state_dim,)
    assert feats.min() >= 0.0 and feats.max() <= 1.0
    assert np.array_equal(feats, res.run_sequence(warm[0]))
    traj = res.trajectory(warm[0])
    assert len(traj) == 6 and [len(layer) for layer in traj[0]] == [75, 25]


def test_run_config_is_deterministic():
    text = """
[dataset]
kind = synthetic
synthetic_classes = 3
synthetic_per_class = 20
synthetic_length = 5
synthetic_dim = 4
synthetic_delay = 1
[reservoir]
depth = 2
total_neurons = 100
bias_width = 40
calibration_samples = 32
[readout]
lambda_points = 5
"""
    a = photorc.run_config(text)
    b = photorc.run_config(text)
    assert a["summary_json"] == b["summary_json"]
    assert 0.0 <= a["mean_accuracy"] <= 1.0
    assert a["layer_neurons"] == [75, 25]
    assert a["confusion"].sum() == 15
    with pytest.raises(photorc.ConfigError):
        photorc.run_config("[nonsense]\n")

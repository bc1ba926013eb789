import math

import numpy as np
import pytest

import ucfformer as ucf


def test_profile_reports_factorized_deltas():
    r = ucf.profile()
    assert r["core_params_per_layer"] == 3_145_728
    assert r["flops_per_layer"] == 50_331_648


def test_score_ratio_at_sixteen():
    full = ucf.profile(modalities=16, steps=16, variant="full")["macs_per_layer"]["attention_scores"]
    fact = ucf.profile(modalities=16, steps=16, variant="sim")["macs_per_layer"]["attention_scores"]
    assert full == 8 * fact


def test_complexity_csv_has_header():
    lines = ucf.complexity_csv(min_layers=2, max_layers=3).splitlines()
    assert lines[1].startswith("variant,layers,")
    assert len(lines) == 2 + 6


def test_loss_oracles():
    assert ucf.contrastive_from_similarity(0.5) == pytest.approx(0.6931471806, abs=1e-10)
    assert ucf.ce_from_probability(0.25) == pytest.approx(1.3862943611, abs=1e-10)
    assert ucf.total_loss(1.0, 0.5, 0.2) == pytest.approx(1.1, abs=1e-15)
    assert ucf.cosine_sim([1.0, 0.0], [3.0, 0.0]) == 1.0


def test_config_defaults_and_strictness():
    cfg = ucf.resolve_config({"model": {"d": 16}})
    assert cfg["model"]["d"] == 16
    assert cfg["model"]["heads"] == 8
    with pytest.raises(ucf.ConfigError, match="model.dropout"):
        ucf.resolve_config({"model": {"dropout": 0.1}})


def test_generate_dataset_is_deterministic():
    cfg = {"data": {"samples_per_class": 3, "seed": 5}}
    a = ucf.generate_dataset(cfg)
    b = ucf.generate_dataset(cfg)
    assert len(a) == 6 * 3
    inputs, label, part = a[0]
    assert [x.shape for x in inputs] == [(8, 16), (8, 12), (8, 9)]
    assert part in {"train", "val", "test"}
    for (xa, la, pa), (xb, lb, pb) in zip(a, b):
        assert la == lb and pa == pb
        assert all(np.array_equal(u, v) for u, v in zip(xa, xb))


def _tiny():
    return {
        "data": {"n_steps": 4, "n_classes": 4, "samples_per_class": 5},
        "model": {"d": 16, "heads": 2, "d_k": 8, "d_v": 8, "layers": 2, "feature_dims": [8, 8, 8]},
        "optimizer": {"learning_rate": 0.005, "clip_norm": 1.0},
        "train": {"epochs": 2, "batch_size": 4, "patience": 0},
    }


def test_gradcheck_tiny():
    assert ucf.gradcheck(_tiny()) < 1e-4


def test_train_is_reproducible_and_records_config():
    a = ucf.train(_tiny())
    b = ucf.train(_tiny())
    assert a["metrics"] == b["metrics"]
    assert a["metrics"][0]["config"]["model"]["d"] == 16
    assert 0.0 <= a["test"]["accuracy"] <= 1.0
    assert math.isfinite(a["test"]["loss"])


def test_fast_acceptance_criteria():
    results = ucf.accept([1, 2, 3, 9])
    assert [r["id"] for r in results] == [1, 2, 3, 9]
    assert all(r["passed"] for r in results), results

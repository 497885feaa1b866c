import json

import numpy as np
import pytest

from lulc_ppo.checkpoint import load_checkpoint, save_checkpoint
from lulc_ppo.errors import CheckpointError
from lulc_ppo.neural import AdamState, init_mlp
from lulc_ppo.ppo import init_networks
from lulc_ppo.rng import Xoshiro256StarStar


def save_default(path, seed=4, train_step=17):
    policy, value = init_networks(seed)
    ap = AdamState.for_params(policy)
    av = AdamState.for_params(value)
    ap.t = 3
    ap.m.weights[0][0, 0] = 0.125
    rng_states = {"update_stream": [1, 2, 3, 4], "worker_streams": [[5, 6, 7, 8]]}
    save_checkpoint(
        path,
        policy=policy,
        value=value,
        adam_policy=ap,
        adam_value=av,
        train_step=train_step,
        rng_states=rng_states,
    )
    return policy, value, ap


def test_roundtrip_restores_everything(tmp_path):
    path = tmp_path / "ckpt.json"
    policy, value, ap = save_default(path)
    loaded = load_checkpoint(path)
    for a, b in zip((*policy.weights, *policy.biases), (*loaded["policy"].weights, *loaded["policy"].biases)):
        assert np.array_equal(a, b)
    for a, b in zip((*value.weights, *value.biases), (*loaded["value"].weights, *loaded["value"].biases)):
        assert np.array_equal(a, b)
    assert loaded["adam_policy"].t == 3
    assert loaded["adam_policy"].m.weights[0][0, 0] == 0.125
    assert loaded["train_step"] == 17
    assert loaded["rng"]["update_stream"] == [1, 2, 3, 4]


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError, match="not found"):
        load_checkpoint(tmp_path / "nope.json")


def test_corrupted_payload_names_sha256(tmp_path):
    path = tmp_path / "ckpt.json"
    save_default(path)
    doc = json.loads(path.read_text())
    doc["train_step"] = 99  # tamper without refreshing the digest
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="sha256"):
        load_checkpoint(path)


def test_missing_field_is_named(tmp_path):
    path = tmp_path / "ckpt.json"
    save_default(path)
    doc = json.loads(path.read_text())
    del doc["adam_value"]
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="adam_value"):
        load_checkpoint(path)


def test_not_json(tmp_path):
    path = tmp_path / "ckpt.json"
    path.write_text("definitely not json{{{")
    with pytest.raises(CheckpointError, match="JSON"):
        load_checkpoint(path)


def test_architecture_mismatch_rejected(tmp_path):
    path = tmp_path / "small.json"
    rng = Xoshiro256StarStar(1)
    small_p = init_mlp([15, 8, 7], rng)
    small_v = init_mlp([15, 8, 1], rng)
    save_checkpoint(
        path,
        policy=small_p,
        value=small_v,
        adam_policy=AdamState.for_params(small_p),
        adam_value=AdamState.for_params(small_v),
        train_step=0,
        rng_states={},
    )
    with pytest.raises(CheckpointError, match="architecture mismatch"):
        load_checkpoint(path)
    loaded = load_checkpoint(path, expect_default_architecture=False)
    assert loaded["policy"].layer_sizes == (15, 8, 7)


def test_save_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_default(a)
    save_default(b)
    assert a.read_bytes() == b.read_bytes()

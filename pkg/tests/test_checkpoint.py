import json

import numpy as np
import pytest

from scpo.errors import CheckpointError
from scpo.net import NetSpec, PolicyNet, load_checkpoint, save_checkpoint


@pytest.fixture
def net():
    return PolicyNet.random(NetSpec(2, 1, hidden_width=6, num_blocks=3, rng_seed=4))


def test_save_load_is_bit_exact(tmp_path, net):
    path = save_checkpoint(
        tmp_path / "nested" / "policy.ckpt",
        net,
        config={"task": "regression"},
        metadata={"epoch": 3},
    )
    ckpt = load_checkpoint(path)

    assert ckpt.net.spec == net.spec
    assert np.array_equal(ckpt.net.get_params(), net.get_params())
    assert ckpt.config == {"task": "regression"}
    assert ckpt.metadata == {"epoch": 3}

    X = np.random.default_rng(0).normal(size=(20, 2))
    assert np.array_equal(ckpt.net.forward_batch(X), net.forward_batch(X))


def test_missing_checkpoint(tmp_path):
    with pytest.raises(CheckpointError, match="not found"):
        load_checkpoint(tmp_path / "absent.ckpt")


def test_not_json(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_wrong_format_tag(tmp_path, net):
    path = save_checkpoint(tmp_path / "p.ckpt", net)
    payload = json.loads(path.read_text(encoding="utf-8"))
    payload["format"] = "something-else"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_param_length_mismatch(tmp_path, net):
    path = save_checkpoint(tmp_path / "p.ckpt", net)
    payload = json.loads(path.read_text(encoding="utf-8"))
    payload["params"] = payload["params"][:-1]
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(CheckpointError, match="corrupt"):
        load_checkpoint(path)

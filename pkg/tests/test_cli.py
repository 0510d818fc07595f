import csv
import json

import pytest

from scpo.cli import main
from scpo.config import parse_config
from scpo.net import PolicyNet, load_checkpoint, save_checkpoint
from scpo.training import read_log_rows

LOG_HEADER = (
    "epoch,loss,loss_after,eval_loss,g_l1,g_positive,g_max,alpha,status,"
    "step_norm,step_norm_sq,descent,doublings,smoothness,wall_clock"
)

SMALL_REGRESSION = {
    "net": {"hidden_width": 8, "num_blocks": 2},
    "trainer": {"epochs": 4, "batch_size": 16},
    "regression": {"grid_size": 16, "eval_size": 32},
}

SMALL_CONTROL = {
    "task": "double-integrator",
    "net": {"hidden_width": 8, "num_blocks": 2},
    "trainer": {"epochs": 1},
    "control": {
        "grid_resolution": 10,
        "rollouts_per_epoch": 4,
        "rollout_steps": 50,
        "reachable_horizon": 500,
    },
}


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def read_csv(path):
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_every_output(tmp_path):
    out = tmp_path / "run"
    path = write_config(tmp_path, SMALL_REGRESSION)
    assert main(["run", "--config", str(path), "--out", str(out)]) == 0

    for name in ("config.json", "log.csv", "final_policy.ckpt", "curve.csv"):
        assert (out / name).is_file()
    assert len(list((out / "checkpoints").glob("epoch_*.ckpt"))) == 4

    lines = (out / "log.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# seeds: ")
    assert lines[1] == LOG_HEADER
    seeds, rows = read_log_rows(out / "log.csv")
    assert seeds["rng_seed"] == 0
    assert len(rows) == 4
    assert all(float(r["g_max"]) <= 1e-9 for r in rows)

    curve = read_csv(out / "curve.csv")
    assert len(curve) == 16
    assert all(abs(float(r["policy"])) <= 1.4 + 1e-9 for r in curve)
    assert float(curve[0]["x"]) == -3.0

    ckpt = load_checkpoint(out / "final_policy.ckpt")
    assert ckpt.metadata["epochs"] == 4
    assert parse_config(json.loads((out / "config.json").read_text())).out_dir == str(out)


def test_seed_override_is_echoed(tmp_path):
    out = tmp_path / "run"
    path = write_config(tmp_path, SMALL_REGRESSION)
    assert main(["run", "--config", str(path), "--out", str(out), "--seed", "5"]) == 0
    seeds, _ = read_log_rows(out / "log.csv")
    assert seeds["rng_seed"] == 5


def test_audit_file(tmp_path):
    data = {**SMALL_REGRESSION, "trainer": {**SMALL_REGRESSION["trainer"], "audit": True}}
    out = tmp_path / "run"
    assert main(["run", "--config", str(write_config(tmp_path, data)), "--out", str(out)]) == 0
    lines = (out / "projection_audit.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) >= 4
    assert {"epoch", "attempt", "S", "G", "status"} <= set(json.loads(lines[0]))


def test_baseline_uses_soft_penalty(tmp_path):
    out = tmp_path / "baseline"
    path = write_config(tmp_path, SMALL_REGRESSION)
    assert main(["baseline", "--config", str(path), "--out", str(out)]) == 0
    _, rows = read_log_rows(out / "log.csv")
    assert {r["status"] for r in rows} == {"soft-penalty"}


def test_invalid_config_exits_with_2(tmp_path, capsys):
    data = {**SMALL_REGRESSION, "trainer": {"bank_capacity": 0}}
    code = main(["run", "--config", str(write_config(tmp_path, data)), "--out", str(tmp_path)])
    assert code == 2
    assert "bank_capacity" in capsys.readouterr().err


def test_missing_config_exits_with_2(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2
    assert "scpo: error:" in capsys.readouterr().err


def test_reachable_with_zero_residual_matches_backup(tmp_path):
    config = parse_config(SMALL_CONTROL)
    spec = config.net.to_spec(2, 1)
    ckpt = save_checkpoint(tmp_path / "theta0.ckpt", PolicyNet.zero_residual(spec))
    out = tmp_path / "reach"

    code = main(
        [
            "reachable",
            "--config",
            str(write_config(tmp_path, SMALL_CONTROL)),
            "--out",
            str(out),
            "--checkpoint",
            str(ckpt),
        ]
    )
    assert code == 0

    safe = (out / "reachable_safe.csv").read_text(encoding="utf-8")
    policy = (out / "reachable_policy.csv").read_text(encoding="utf-8")
    assert policy == safe
    assert (out / "reachable_expert.csv").is_file()
    rows = read_csv(out / "reachable_safe.csv")
    assert len(rows) == 100
    assert set(rows[0]) == {"x1", "x2", "reachable"}


def test_reachable_labels_several_checkpoints(tmp_path):
    config = parse_config(SMALL_CONTROL)
    spec = config.net.to_spec(2, 1)
    paths = [
        save_checkpoint(tmp_path / f"{name}.ckpt", PolicyNet.zero_residual(spec))
        for name in ("early", "late")
    ]
    out = tmp_path / "reach"
    argv = ["reachable", "--config", str(write_config(tmp_path, SMALL_CONTROL)), "--out", str(out)]
    assert main(argv + ["--checkpoint", *map(str, paths)]) == 0
    assert (out / "reachable_policy_early.csv").is_file()
    assert (out / "reachable_policy_late.csv").is_file()


def test_reachable_rejects_missing_checkpoint(tmp_path, capsys):
    path = write_config(tmp_path, SMALL_CONTROL)
    code = main(["reachable", "--config", str(path), "--checkpoint", str(tmp_path / "x.ckpt")])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_reachable_needs_the_control_task(tmp_path, capsys):
    path = write_config(tmp_path, SMALL_REGRESSION)
    code = main(["reachable", "--config", str(path), "--checkpoint", str(tmp_path / "x.ckpt")])
    assert code == 2
    assert "double-integrator" in capsys.readouterr().err


def test_reachable_rejects_mismatched_network(tmp_path, capsys):
    config = parse_config({**SMALL_CONTROL, "net": {"hidden_width": 4, "num_blocks": 2}})
    other = PolicyNet.zero_residual(config.net.to_spec(2, 1))
    ckpt = save_checkpoint(tmp_path / "other.ckpt", other)
    path = write_config(tmp_path, SMALL_CONTROL)
    assert main(["reachable", "--config", str(path), "--checkpoint", str(ckpt)]) == 2
    assert "does not match" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["unknown"]])
def test_bad_arguments_exit(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2

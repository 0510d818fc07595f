import numpy as np
import pytest

from scpo.config import parse_config
from scpo.errors import ConfigError, InfeasibleStartError
from scpo.metrics import GridBoundMetric
from scpo.net import load_checkpoint
from scpo.training import RegressionTask, ScpoTrainer, build_task, train
from scpo.training.trainer import ABORTED
from tests.fake_metrics import LinearMetric, RecordingMetric

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def regression_config(mode="scpo", bound=1.4, **trainer):
    return parse_config(
        {
            "mode": mode,
            "net": {"hidden_width": 8, "num_blocks": 2},
            "trainer": {"epochs": 15, "batch_size": 32, **trainer},
            "regression": {"grid_size": 32, "eval_size": 64, "bound": bound},
        }
    )


def output_bias_params(task, value):
    params = task.initial_params()
    params[-1] = value
    return params


@pytest.fixture(scope="module")
def small_run():
    config = regression_config()
    return config, train(config)


# ---------------------------------------------------------------------------
# Invariants over a short regression run
# ---------------------------------------------------------------------------


def test_every_iterate_is_safe(small_run):
    _, result = small_run
    assert len(result.log) == 15
    assert max(result.log.column("g_max")) <= 1e-9
    assert all(g == 0.0 for g in result.log.column("g_positive"))


def test_accepted_steps_satisfy_armijo(small_run):
    _, result = small_run
    for r in result.log:
        assert r.loss_after <= r.loss - 0.1 * r.alpha * r.step_norm_sq + 1e-9


def test_raw_steps_are_plain_gradient_steps(small_run):
    config, result = small_run
    for r in result.log:
        if r.status == "raw-step-feasible":
            # delta = -lr * grad, so |delta|^2 = lr * (-grad^T delta)
            assert r.step_norm_sq == pytest.approx(config.learning_rate * r.descent, rel=1e-9)


def test_training_reduces_eval_loss(small_run):
    _, result = small_run
    eval_loss = result.log.column("eval_loss")
    assert eval_loss[-1] < eval_loss[0]


def test_training_is_deterministic(small_run):
    config, first = small_run
    second = train(config)

    assert np.array_equal(first.params, second.params)
    for a, b in zip(first.log, second.log):
        row_a, row_b = a.as_row(), b.as_row()
        row_a.pop("wall_clock")
        row_b.pop("wall_clock")
        assert row_a == row_b


def test_zero_epochs_returns_initial_params():
    config = regression_config(epochs=0)
    result = train(config)
    assert len(result.log) == 0
    assert np.array_equal(result.params, build_task(config).initial_params())


# ---------------------------------------------------------------------------
# Individual behaviors
# ---------------------------------------------------------------------------


def test_unsafe_start_rejected():
    config = regression_config()
    task = build_task(config)
    trainer = ScpoTrainer.from_config(config, task)
    with pytest.raises(InfeasibleStartError):
        trainer.initial_state(output_bias_params(task, 5.0))


def test_loose_bound_takes_the_raw_step():
    config = regression_config(bound=100.0, epochs=1)
    task = build_task(config)
    result = ScpoTrainer.from_config(config, task).train()

    record = result.log.records[0]
    assert record.status == "raw-step-feasible"
    assert record.alpha == 1.0
    assert record.doublings == 0

    batch = task.sample_batch(np.random.default_rng(config.trainer.rng_seed))
    theta0 = task.initial_params()
    _, grad = task.loss_and_grad(theta0, batch)
    expected = theta0 - config.learning_rate * grad
    np.testing.assert_allclose(result.params, expected, rtol=0, atol=1e-15)


def test_rejected_line_search_is_a_zero_step():
    # the raw step is safe but overshoots the batch loss by orders of magnitude
    config = regression_config(bound=1e12, epochs=1, learning_rate=1e4, max_backtracks=0)
    task = build_task(config)
    result = ScpoTrainer.from_config(config, task).train()

    record = result.log.records[0]
    assert record.status == "zero-step"
    assert record.alpha == 0.0
    assert record.loss_after == record.loss
    assert np.array_equal(result.params, task.initial_params())


@pytest.fixture(scope="module")
def tight_run():
    config = regression_config(bound=0.05, learning_rate=0.05)
    return config, train(config)


def test_tight_bound_forces_projection(tight_run):
    _, result = tight_run
    statuses = set(result.log.column("status"))
    assert "projected" in statuses
    assert max(result.log.column("g_max")) <= 1e-9


def test_projected_steps_are_descent_directions(tight_run):
    config, result = tight_run
    lr = config.learning_rate
    for r in result.log:
        if r.status == "projected":
            assert r.descent >= r.step_norm_sq / lr - 1e-6 * (1.0 + r.step_norm_sq)


def test_checkpoints_reproduce_logged_values(tmp_path):
    config = regression_config(epochs=3)
    task = build_task(config)
    result = ScpoTrainer.from_config(config, task).train(checkpoint_dir=tmp_path)

    assert [p.name for p in result.checkpoints] == [
        "epoch_0000.ckpt",
        "epoch_0001.ckpt",
        "epoch_0002.ckpt",
    ]
    for path, record in zip(result.checkpoints, result.log):
        ckpt = load_checkpoint(path)
        params = ckpt.net.get_params()
        assert ckpt.metadata["epoch"] == record.epoch
        assert float(np.max(task.metric.evaluate(params))) == record.g_max
        assert task.eval_loss(params) == record.eval_loss
    assert ckpt.config["trainer"]["epochs"] == 3


def test_metric_failure_aborts_the_epoch():
    config = regression_config(epochs=2)
    base = build_task(config)
    # the first evaluation (the starting point) succeeds, every later one fails
    task = RegressionTask(
        spec=base.spec,
        grid_metric=RecordingMetric(base.grid_metric, fail_after=1),
        batch_size=base.batch_size,
        eval_inputs=base.eval_inputs,
    )
    result = ScpoTrainer.from_config(config, task).train()

    assert result.log.column("status") == [ABORTED, ABORTED]
    assert result.log.column("alpha") == [0.0, 0.0]
    assert np.array_equal(result.params, base.initial_params())
    assert result.state.epoch == 2


# ---------------------------------------------------------------------------
# Soft-penalty baseline
# ---------------------------------------------------------------------------


def test_soft_penalty_with_zero_weight_is_gradient_descent():
    config = regression_config("soft-penalty", epochs=1, penalty_weight=0.0)
    task = build_task(config)
    result = ScpoTrainer.from_config(config, task).train()

    assert result.log.records[0].status == "soft-penalty"
    batch = task.sample_batch(np.random.default_rng(config.trainer.rng_seed))
    theta0 = task.initial_params()
    _, grad = task.loss_and_grad(theta0, batch)
    expected = theta0 - config.learning_rate * grad
    np.testing.assert_allclose(result.params, expected, rtol=0, atol=1e-15)


def test_soft_penalty_pushes_back_into_the_bound():
    config = regression_config("soft-penalty", epochs=1, penalty_weight=0.001)
    task = build_task(config)
    trainer = ScpoTrainer.from_config(config, task)
    state = trainer.initial_state(output_bias_params(task, 2.0))
    batch = task.sample_batch(np.random.default_rng(0))

    _, with_penalty = trainer.soft_penalty_step(state, batch)
    _, without = trainer.soft_penalty_step(state, batch, weight=0.0)
    assert with_penalty.g_positive < without.g_positive


def test_soft_penalty_needs_a_penalty_metric():
    config = regression_config("soft-penalty")
    base = build_task(config)
    task = RegressionTask(spec=base.spec, grid_metric=LinearMetric(W=np.zeros((1, 3)), b=[-1.0]))
    with pytest.raises(ConfigError):
        ScpoTrainer.from_config(config, task)


def test_learning_rate_must_be_positive():
    task = build_task(regression_config())
    with pytest.raises(ConfigError):
        ScpoTrainer(task, learning_rate=0.0)


def test_grid_metric_is_the_regression_constraint():
    task = build_task(regression_config())
    assert isinstance(task.metric, GridBoundMetric)
    assert task.metric.k == 32


# ---------------------------------------------------------------------------
# Control task
# ---------------------------------------------------------------------------


def test_tiny_control_run_stays_safe():
    config = parse_config(
        {
            "task": "double-integrator",
            "net": {"hidden_width": 8, "num_blocks": 2},
            "trainer": {"epochs": 2},
            "control": {"grid_resolution": 10, "rollouts_per_epoch": 4, "rollout_steps": 50},
        }
    )
    result = train(config)
    assert len(result.log) == 2
    assert max(result.log.column("g_max")) <= 1e-9
    assert all(np.isfinite(result.log.column("eval_loss")))

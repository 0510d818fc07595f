import numpy as np
import pytest

from scpo.config import parse_config
from scpo.control import MaliciousExpert, value_backup
from scpo.errors import SamplingError
from scpo.training import batch_sampler, build_task, target_function

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def control_config(**control):
    return parse_config(
        {
            "task": "double-integrator",
            "net": {"hidden_width": 8, "num_blocks": 2},
            "control": {
                "grid_resolution": 10,
                "rollouts_per_epoch": 16,
                "rollout_steps": 20,
                **control,
            },
        }
    )


@pytest.fixture(scope="module")
def control_task():
    return build_task(control_config())


# ---------------------------------------------------------------------------
# Control batches
# ---------------------------------------------------------------------------


def test_only_recoverable_trajectories_are_kept():
    task = build_task(control_config(rollouts_per_epoch=64, rollout_steps=5))
    system = task.system
    X0 = np.random.default_rng(11).uniform(system.state_lo, system.state_hi, size=(64, 2))
    V0 = value_backup(system, task.backup, task.cost, X0, task.target, task.value_horizon)
    assert np.isinf(V0).any() and np.isfinite(V0).any()

    states = task.sample_states(np.random.default_rng(11), task.initial_params())

    V = value_backup(system, task.backup, task.cost, states, task.target, task.value_horizon)
    assert np.all(np.isfinite(V))
    for x in X0[np.isfinite(V0)]:
        assert np.any(np.all(states == x, axis=1))
    for x in X0[np.isinf(V0)]:
        assert not np.any(np.all(states == x, axis=1))


def test_sampling_gives_up_after_max_resample():
    task = build_task(control_config(rollouts_per_epoch=4, rollout_steps=400, max_resample=2))
    # full positive thrust outside the target drives every rollout out of the state box
    params = task.initial_params()
    params[-1] = 5.0
    with pytest.raises(SamplingError, match="3 sampling attempts"):
        task.sample_batch(np.random.default_rng(0), params)


def test_expert_label_example():
    expert = MaliciousExpert(gain=2.0, noise_std=0.0)
    labels = expert.labels([[1.0, 1.0], [0.1, 0.1]], np.random.default_rng(0))
    assert labels.tolist() == [[-1.0], [-0.4]]


def test_noise_free_expert_labels_the_batch():
    task = build_task(control_config(expert_noise_std=0.0))
    batch = task.sample_batch(np.random.default_rng(4), task.initial_params())
    assert batch.inputs.shape[1] == 2
    assert np.array_equal(batch.targets, task.expert.noise_free(batch.inputs))


def test_control_batch_is_seeded(control_task):
    params = control_task.initial_params()
    a = control_task.sample_batch(np.random.default_rng(9), params)
    b = control_task.sample_batch(np.random.default_rng(9), params)
    assert np.array_equal(a.inputs, b.inputs)
    assert np.array_equal(a.targets, b.targets)
    assert np.all(np.abs(a.targets) <= 1.0)


# ---------------------------------------------------------------------------
# batch_sampler
# ---------------------------------------------------------------------------


def test_batch_sampler_defaults_to_the_initial_policy(control_task):
    a = batch_sampler(control_task, np.random.default_rng(2))
    b = control_task.sample_batch(np.random.default_rng(2), control_task.initial_params())
    assert np.array_equal(a.inputs, b.inputs)
    assert np.array_equal(a.targets, b.targets)


def test_batch_sampler_regression():
    task = build_task(parse_config({"trainer": {"batch_size": 64}}))
    batch = batch_sampler(task, np.random.default_rng(0))
    assert batch.inputs.shape == (64, 1)
    np.testing.assert_array_equal(batch.targets, target_function(batch.inputs))
    again = batch_sampler(task, np.random.default_rng(0))
    assert np.array_equal(batch.inputs, again.inputs)

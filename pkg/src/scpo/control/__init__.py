from scpo.control.expert import MaliciousExpert
from scpo.control.lqr import BackupController, riccati_residual, solve_dare
from scpo.control.metric import ControlSafetyMetric, control_safety_metric
from scpo.control.policy import ResidualPolicy
from scpo.control.reachable import estimate_reachable_set, state_grid
from scpo.control.rollout import BatchRollout, Trajectory, rollout, rollout_batch
from scpo.control.system import LinearSystem, StageCost, clip, double_integrator
from scpo.control.target import TargetKind, TargetSet
from scpo.control.value import q_and_advantage, value_backup

__all__ = [
    "LinearSystem",
    "StageCost",
    "clip",
    "double_integrator",
    "solve_dare",
    "riccati_residual",
    "BackupController",
    "TargetSet",
    "TargetKind",
    "Trajectory",
    "BatchRollout",
    "rollout",
    "rollout_batch",
    "value_backup",
    "q_and_advantage",
    "ResidualPolicy",
    "ControlSafetyMetric",
    "control_safety_metric",
    "estimate_reachable_set",
    "state_grid",
    "MaliciousExpert",
]

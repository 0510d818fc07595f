from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from scpo.config import ExperimentConfig, TaskKind, TrainMode, load_config
from scpo.control.reachable import estimate_reachable_set, state_grid
from scpo.control.rollout import rollout
from scpo.errors import ConfigError, ScpoError
from scpo.logger import configure_logging, get_logger
from scpo.net.checkpoint import load_checkpoint, save_checkpoint
from scpo.net.policy import PolicyNet
from scpo.projection.audit import ProjectionAudit
from scpo.training.export import (
    MASK_COLUMNS,
    REGRESSION_CURVE_COLUMNS,
    TRAJECTORY_COLUMNS,
    write_mask,
    write_regression_curve,
    write_trajectories,
)
from scpo.training.log import COLUMNS
from scpo.training.tasks import DoubleIntegratorTask, RegressionTask, build_task, target_function
from scpo.training.trainer import ScpoTrainer

logger = get_logger(__name__)

EPILOG = f"""\
output files (comma-delimited, header row first):
  log.csv                 '# seeds: ...' line, then {", ".join(COLUMNS)}
  curve.csv (regression)  {", ".join(REGRESSION_CURVE_COLUMNS)}
  curve.csv (control)     {", ".join(TRAJECTORY_COLUMNS)}
  reachable_*.csv         {", ".join(MASK_COLUMNS)}
  final_policy.ckpt       JSON checkpoint: net spec, parameters, config echo
  config.json             the effective experiment config
"""


def _write_curve(out: Path, task, params: np.ndarray, config: ExperimentConfig) -> Path:
    net = PolicyNet(task.spec, params)
    if isinstance(task, RegressionTask):
        grid = task.metric.grid
        return write_regression_curve(
            out / "curve.csv",
            grid,
            net.forward_batch(grid),
            target_function(grid),
            task.metric.bound,
        )

    ctl = config.control
    x0 = np.asarray(ctl.example_state, dtype=np.float64)
    learned = task.policy(params)
    policies = {
        "safe": learned.backup_only,
        "policy": learned,
        "expert": task.expert.as_policy(ctl.expert_seed),
    }
    trajectories = {
        label: rollout(task.system, policy, x0, ctl.reachable_horizon, task.target, task.cost)
        for label, policy in policies.items()
    }
    for label, traj in trajectories.items():
        logger.info(
            "trajectory %s: cost=%.4g feasible=%s reached=%s",
            label,
            traj.cost,
            traj.feasible,
            traj.reached_target,
        )
    return write_trajectories(out / "curve.csv", trajectories)


def cmd_run(config: ExperimentConfig) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(config.model_dump_json(indent=2), encoding="utf-8")

    audit = None
    if config.trainer.audit:
        audit = ProjectionAudit.open(out / "projection_audit.jsonl")
    try:
        task = build_task(config)
        trainer = ScpoTrainer.from_config(config, task, audit=audit)
        result = trainer.train(checkpoint_dir=out / "checkpoints")
    finally:
        if audit is not None:
            audit.close()

    log_path = result.log.write_csv(out / "log.csv")
    ckpt_path = save_checkpoint(
        out / "final_policy.ckpt",
        PolicyNet(task.spec, result.params),
        config=config.model_dump(mode="json"),
        metadata={"epochs": len(result.log), "seeds": config.seeds},
    )
    curve_path = _write_curve(out, task, result.params, config)
    for path in (log_path, ckpt_path, curve_path):
        logger.info("wrote %s", path)
    return 0


def cmd_reachable(config: ExperimentConfig, checkpoints: Sequence[Path]) -> int:
    if config.task is not TaskKind.DOUBLE_INTEGRATOR:
        raise ConfigError("reachable-set analysis needs task 'double-integrator'")
    loaded = [(Path(p), load_checkpoint(p)) for p in checkpoints]
    task: DoubleIntegratorTask = build_task(config)
    ctl = config.control
    out = Path(config.out_dir)
    grid = state_grid(task.system, ctl.grid_resolution)

    policies = {
        "safe": task.backup,
        "expert": task.expert.as_policy(ctl.expert_seed),
    }
    for path, ckpt in loaded:
        if ckpt.net.spec != task.spec:
            raise ConfigError(f"checkpoint {path} does not match the configured network")
        label = "policy" if len(loaded) == 1 else f"policy_{path.stem}"
        policies[label] = task.policy(ckpt.net.get_params())

    for label, policy in policies.items():
        mask = estimate_reachable_set(task.system, policy, grid, ctl.reachable_horizon, task.target)
        path = write_mask(out / f"reachable_{label}.csv", grid, mask)
        logger.info("wrote %s (%d of %d states reachable)", path, int(mask.sum()), mask.size)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scpo",
        description="Safe training by sampled weight-space projection.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, summary: str) -> argparse.ArgumentParser:
        p = sub.add_parser(
            name,
            help=summary,
            epilog=EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", type=Path, default=None, help="experiment config (JSON)")
        p.add_argument("--out", type=Path, default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="training seed override")
        return p

    command("run", "train with the configured mode")
    command("baseline", "train with the soft-penalty baseline")
    reach = command("reachable", "estimate backward reachable sets")
    reach.add_argument(
        "--checkpoint", type=Path, nargs="+", required=True, help="policy checkpoint(s)"
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.INFO)
    try:
        mode = TrainMode.SOFT_PENALTY if args.command == "baseline" else None
        config = load_config(args.config, out=args.out, seed=args.seed, mode=mode)
        if args.command == "reachable":
            return cmd_reachable(config, args.checkpoint)
        return cmd_run(config)
    except ScpoError as e:
        print(f"scpo: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

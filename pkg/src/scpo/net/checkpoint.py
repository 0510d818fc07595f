from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from scpo.errors import CheckpointError, ConfigError, DimensionError
from scpo.net.policy import PolicyNet
from scpo.net.spec import NetSpec

CHECKPOINT_FORMAT = "scpo-policy/1"


@dataclass(frozen=True)
class Checkpoint:
    net: PolicyNet
    config: Optional[Dict[str, Any]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "spec": self.net.spec.to_dict(),
            # json writes floats with repr, which round-trips float64 exactly
            "params": self.net.params.tolist(),
            "config": self.config,
            "metadata": self.metadata,
        }


def save_checkpoint(
    path: Union[str, Path],
    net: PolicyNet,
    *,
    config: Optional[Dict[str, Any]] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    payload = Checkpoint(net=net, config=config, metadata=dict(metadata or {})).to_dict()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload), encoding="utf-8")
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}") from e
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise CheckpointError(f"checkpoint not found: {path}") from e
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e

    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} checkpoint")
    try:
        spec = NetSpec.from_dict(payload["spec"])
        net = PolicyNet(spec, payload["params"])
    except (KeyError, TypeError, ConfigError, DimensionError) as e:
        raise CheckpointError(f"corrupt checkpoint {path}: {e}") from e
    return Checkpoint(net=net, config=payload.get("config"), metadata=payload.get("metadata") or {})

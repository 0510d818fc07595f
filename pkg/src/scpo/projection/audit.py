from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Optional, TextIO, Union

if TYPE_CHECKING:
    from scpo.projection.problem import ProjectionProblem
    from scpo.projection.solver import ProjectionResult


@dataclass
class ProjectionAudit:
    """
    JSON-lines record of every solved projection instance, one object per line.
    """

    path: Path
    epoch: Optional[int] = None
    _fh: Optional[TextIO] = field(default=None, init=False, repr=False)

    @classmethod
    def open(cls, path: Union[str, Path]) -> ProjectionAudit:
        audit = cls(Path(path))
        audit.path.parent.mkdir(parents=True, exist_ok=True)
        audit._fh = audit.path.open("w", encoding="utf-8")
        return audit

    def record(
        self, problem: ProjectionProblem, result: ProjectionResult, *, attempt: int = 0
    ) -> None:
        if self._fh is None:
            return
        entry = {"epoch": self.epoch, "attempt": attempt}
        entry.update(problem.to_dict())
        entry.update(result.to_dict())
        self._fh.write(json.dumps(entry) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> ProjectionAudit:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

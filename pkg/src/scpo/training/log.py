from __future__ import annotations

import csv
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

COLUMNS: Tuple[str, ...] = (
    "epoch",
    "loss",
    "loss_after",
    "eval_loss",
    "g_l1",
    "g_positive",
    "g_max",
    "alpha",
    "status",
    "step_norm",
    "step_norm_sq",
    "descent",
    "doublings",
    "smoothness",
    "wall_clock",
)


@dataclass(frozen=True)
class EpochRecord:
    """
    One training epoch. `loss` and `loss_after` are measured on the same frozen
    batch; `descent` is -grad^T delta_star and `step_norm` is |delta_star| before
    the line search scales it by alpha. g values are taken at the new iterate.
    """

    epoch: int
    loss: float
    loss_after: float
    eval_loss: float
    g_l1: float
    g_positive: float
    g_max: float
    alpha: float
    status: str
    step_norm: float
    step_norm_sq: float
    descent: float
    doublings: int
    smoothness: Tuple[float, ...]
    wall_clock: float

    def as_row(self) -> Dict[str, str]:
        row = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "smoothness":
                row[f.name] = ";".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                row[f.name] = repr(float(value))
            else:
                row[f.name] = str(value)
        return row


@dataclass
class TrainLog:
    """Append-only epoch log, written as CSV behind a `# seeds:` header line."""

    seeds: Dict[str, int] = field(default_factory=dict)
    records: List[EpochRecord] = field(default_factory=list)

    def append(self, record: EpochRecord) -> None:
        if record.epoch != len(self.records):
            raise ValueError(f"expected epoch {len(self.records)}, got {record.epoch}")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EpochRecord]:
        return iter(self.records)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            seeds = " ".join(f"{k}={v}" for k, v in sorted(self.seeds.items()))
            fh.write(f"# seeds: {seeds}\n")
            writer = csv.DictWriter(fh, fieldnames=list(COLUMNS))
            writer.writeheader()
            for record in self.records:
                writer.writerow(record.as_row())
        return path


def read_log_rows(path: Union[str, Path]) -> Tuple[Dict[str, int], List[Dict[str, str]]]:
    """Seeds header and raw CSV rows of a log written by `TrainLog.write_csv`."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        header = fh.readline().strip()
        seeds: Dict[str, int] = {}
        if header.startswith("# seeds:"):
            for item in header[len("# seeds:") :].split():
                key, _, value = item.partition("=")
                seeds[key] = int(value)
        rows = list(csv.DictReader(fh))
    return seeds, rows

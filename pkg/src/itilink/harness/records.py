"""Metric records and the fixed-schema CSV they are exchanged through.

Column order is part of the interface (the plot tool checks the header
verbatim): scenario_id, metric_kind, eb_n0_db, value, crlb_value, trials,
error_blocks, seed.  Floats are written with repr so parsing a file back
reproduces the records exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

CSV_COLUMNS = ("scenario_id", "metric_kind", "eb_n0_db", "value",
               "crlb_value", "trials", "error_blocks", "seed")

METRIC_KINDS = ("mse_cir_total", "mse_cfr_per_bin", "bler")


@dataclass(frozen=True)
class MetricRecord:
    scenario_id: str
    metric_kind: str
    eb_n0_db: float
    value: float
    trials: int
    seed: int
    crlb_value: float | None = None
    error_blocks: int | None = None

    def __post_init__(self):
        if self.metric_kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.metric_kind!r}")
        if self.metric_kind == "bler":
            if self.error_blocks is None:
                raise ValueError("bler records carry error_blocks")
            if not self.trials or self.value != self.error_blocks / self.trials:
                raise ValueError("bler must equal error_blocks / trials")
            if not 0.0 <= self.value <= 1.0:
                raise ValueError("bler out of [0, 1]")


def write_csv(records, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.scenario_id,
                r.metric_kind,
                repr(float(r.eb_n0_db)),
                repr(float(r.value)),
                "" if r.crlb_value is None else repr(float(r.crlb_value)),
                str(r.trials),
                "" if r.error_blocks is None else str(r.error_blocks),
                str(r.seed),
            ])


def read_csv(path) -> list[MetricRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        out = []
        for row in reader:
            (sid, kind, eb, value, crlb, trials, errors, seed) = row
            out.append(MetricRecord(
                scenario_id=sid, metric_kind=kind, eb_n0_db=float(eb),
                value=float(value),
                crlb_value=None if crlb == "" else float(crlb),
                trials=int(trials),
                error_blocks=None if errors == "" else int(errors),
                seed=int(seed)))
        return out

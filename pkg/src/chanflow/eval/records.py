"""Evaluation records and their CSV serialization."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

__all__ = ["EvalRecord", "write_records", "read_records", "CSV_COLUMNS"]

CSV_COLUMNS = ("scenario", "method", "w", "steps", "snr_db", "spacing", "nmse_db", "cosine", "n_samples", "seed")


@dataclass(frozen=True)
class EvalRecord:
    """One sweep cell: method at (snr, spacing) on one scenario."""

    scenario: str
    method: str  # ls | lmmse | flow | ablation label
    w: float  # guidance scale; NaN for classical methods
    steps: int  # sampling steps; 0 for classical methods
    snr_db: float
    spacing: int
    nmse_db: float
    cosine: float
    n_samples: int
    seed: int

    def __post_init__(self):
        if not math.isfinite(self.nmse_db):
            raise ValueError(f"nmse_db must be finite, got {self.nmse_db}")
        if not (0.0 <= self.cosine <= 1.0 + 1e-9):
            raise ValueError(f"cosine {self.cosine} outside [0, 1]")
        if self.n_samples <= 0:
            raise ValueError("n_samples must be positive")

    @property
    def label(self):
        """Stable method label for figures: flow carries its settings."""
        if self.method != "flow":
            return self.method
        base = f"flow(w={self.w:g})"
        return base if self.steps == 1 else f"flow(w={self.w:g},steps={self.steps})"


def _fmt(value):
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.6f}"
    return str(value)


def write_records(path, records):
    """Write records as CSV; deterministic formatting for byte-stable reruns."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.scenario,
                    r.method,
                    _fmt(float(r.w)),
                    r.steps,
                    _fmt(float(r.snr_db)),
                    r.spacing,
                    _fmt(float(r.nmse_db)),
                    _fmt(float(r.cosine)),
                    r.n_samples,
                    r.seed,
                ]
            )


def read_records(path):
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                EvalRecord(
                    scenario=row["scenario"],
                    method=row["method"],
                    w=float(row["w"]),
                    steps=int(row["steps"]),
                    snr_db=float(row["snr_db"]),
                    spacing=int(row["spacing"]),
                    nmse_db=float(row["nmse_db"]),
                    cosine=float(row["cosine"]),
                    n_samples=int(row["n_samples"]),
                    seed=int(row["seed"]),
                )
            )
    return records

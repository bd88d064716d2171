"""Experiment orchestration: sweeps, ablations, records and reports."""

from .records import CSV_COLUMNS, EvalRecord, read_records, write_records
from .report import write_figures
from .sweep import (
    MethodSpec,
    SweepConfig,
    ablation_label,
    estimate_forward_flops,
    modality_ablation,
    run_sweep,
)

__all__ = [
    "EvalRecord",
    "write_records",
    "read_records",
    "CSV_COLUMNS",
    "MethodSpec",
    "SweepConfig",
    "run_sweep",
    "modality_ablation",
    "ablation_label",
    "estimate_forward_flops",
    "write_figures",
]

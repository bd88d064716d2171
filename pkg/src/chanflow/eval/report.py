"""Figure-oriented CSV extraction from sweep records.

Produces one tidy CSV per figure axis: NMSE and cosine versus SNR at the
reference spacing, NMSE versus spacing at the reference SNR, ablation
rows, and the out-of-distribution curves.
"""

from __future__ import annotations

import csv
import os
from collections import defaultdict

from .records import read_records

__all__ = ["write_figures", "REFERENCE_SPACING", "REFERENCE_SNR_DB"]

REFERENCE_SPACING = 8
REFERENCE_SNR_DB = 0.0

_CLASSICAL = ("ls", "lmmse")


def _is_ood(record):
    return record.scenario.startswith("ood")


def _pivot(rows, x_field, y_field):
    """Wide table: one row per x value, one column per method label."""
    labels = sorted({r.label for r in rows})
    by_x = defaultdict(dict)
    for r in rows:
        by_x[getattr(r, x_field)][r.label] = getattr(r, y_field)
    header = [x_field] + labels
    table = [header]
    for x in sorted(by_x):
        table.append([x] + [by_x[x].get(label, "") for label in labels])
    return table


def _write_csv(path, table):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(table)


def write_figures(records_path, out_dir=None):
    """Emit per-figure CSVs next to (or into out_dir from) a records CSV."""
    out_dir = out_dir or os.path.dirname(os.path.abspath(records_path))
    os.makedirs(out_dir, exist_ok=True)
    records = read_records(records_path)
    written = []

    in_dist = [r for r in records if not _is_ood(r)]
    ood = [r for r in records if _is_ood(r)]
    standard = [r for r in in_dist if r.method in _CLASSICAL or r.method == "flow"]

    snr_rows = [r for r in standard if r.spacing == REFERENCE_SPACING]
    if snr_rows:
        _write_csv(os.path.join(out_dir, "fig_snr_nmse.csv"), _pivot(snr_rows, "snr_db", "nmse_db"))
        _write_csv(os.path.join(out_dir, "fig_snr_cosine.csv"), _pivot(snr_rows, "snr_db", "cosine"))
        written += ["fig_snr_nmse.csv", "fig_snr_cosine.csv"]

    spacing_rows = [r for r in standard if r.snr_db == REFERENCE_SNR_DB]
    if spacing_rows:
        _write_csv(os.path.join(out_dir, "fig_spacing_nmse.csv"), _pivot(spacing_rows, "spacing", "nmse_db"))
        written.append("fig_spacing_nmse.csv")

    ablation_rows = [r for r in in_dist if r.method not in _CLASSICAL and r.method != "flow"]
    if ablation_rows:
        table = [["method", "snr_db", "spacing", "nmse_db", "cosine"]]
        for r in sorted(ablation_rows, key=lambda r: r.method):
            table.append([r.method, r.snr_db, r.spacing, r.nmse_db, r.cosine])
        _write_csv(os.path.join(out_dir, "fig_ablation.csv"), table)
        written.append("fig_ablation.csv")

    ood_rows = [r for r in ood if r.spacing == REFERENCE_SPACING]
    if ood_rows:
        _write_csv(os.path.join(out_dir, "fig_ood_nmse.csv"), _pivot(ood_rows, "snr_db", "nmse_db"))
        _write_csv(os.path.join(out_dir, "fig_ood_cosine.csv"), _pivot(ood_rows, "snr_db", "cosine"))
        written += ["fig_ood_nmse.csv", "fig_ood_cosine.csv"]

    return [os.path.join(out_dir, name) for name in written]

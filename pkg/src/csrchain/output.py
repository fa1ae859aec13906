"""Artifact emission: trajectory CSV and the run report.

Both writers are byte-deterministic: fixed field order, fixed 17
significant-digit formatting, LF newlines.  The report deliberately omits
wall-clock timing (kept on the in-memory report only) so that identical runs
produce identical files.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .model import Controls, Trajectory
from .sweep import SolveReport

CSV_HEADER = ["t", "x", "i_s", "i_m", "i_r", "q", "p_s", "p_m", "p_r", "u", "u_prime"]


def _fmt(value) -> str:
    return format(float(value), ".17g")


def emit_csv(trajectory: Trajectory, path) -> None:
    """Write the trajectory as CSV: one row per period plus a terminal row.

    Row t carries the values indexed at time t; costate cells are empty at
    t = 1 (costates start at time 2) and control/quantity cells are empty on
    the terminal row.
    """
    T = trajectory.horizon
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for t in range(1, T + 1):
        costates = ["", "", ""] if t == 1 else [
            _fmt(trajectory.p_s[t - 2]),
            _fmt(trajectory.p_m[t - 2]),
            _fmt(trajectory.p_r[t - 2]),
        ]
        writer.writerow([
            t,
            _fmt(trajectory.x[t - 1]),
            _fmt(trajectory.controls.i_s[t - 1]),
            _fmt(trajectory.controls.i_m[t - 1]),
            _fmt(trajectory.controls.i_r[t - 1]),
            _fmt(trajectory.q[t - 1]),
            *costates,
            _fmt(trajectory.u[t - 1]),
            _fmt(trajectory.u_prime[t - 1]),
        ])
    writer.writerow([
        T + 1,
        _fmt(trajectory.x[T]),
        "", "", "", "",
        _fmt(trajectory.p_s[T - 1]),
        _fmt(trajectory.p_m[T - 1]),
        _fmt(trajectory.p_r[T - 1]),
        _fmt(trajectory.u[T]),
        _fmt(trajectory.u_prime[T]),
    ])
    Path(path).write_text(buffer.getvalue())


def parse_csv(path) -> Trajectory:
    """Re-read a trajectory CSV into a Trajectory.

    Only the reported columns are recovered; the auxiliary adjoint fields
    are left unset.
    """
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header in {path}")
    data = rows[1:]
    T = len(data) - 1
    x = np.array([float(r[1]) for r in data])
    i_s = np.array([float(r[2]) for r in data[:T]])
    i_m = np.array([float(r[3]) for r in data[:T]])
    i_r = np.array([float(r[4]) for r in data[:T]])
    q = np.array([float(r[5]) for r in data[:T]])
    p_s = np.array([float(r[6]) for r in data[1:]])
    p_m = np.array([float(r[7]) for r in data[1:]])
    p_r = np.array([float(r[8]) for r in data[1:]])
    u = np.array([float(r[9]) for r in data])
    u_prime = np.array([float(r[10]) for r in data])
    return Trajectory(
        x=x, controls=Controls(i_s=i_s, i_m=i_m, i_r=i_r), q=q,
        p_s=p_s, p_m=p_m, p_r=p_r, u=u, u_prime=u_prime,
    )


def render_report(report: SolveReport) -> str:
    """Stable-order key: value rendering of a solve report.

    The oracle fields appear only when the oracle ran; timing is omitted for
    byte-for-byte reproducibility.
    """
    lines = [
        f"scenario: {report.scenario_name}",
        f"horizon_T: {report.horizon_T}",
        f"solver_path: {report.solver_path}",
        f"seed: {report.seed}",
        f"tolerance: {_fmt(report.tolerance)}",
        f"residual_max: {_fmt(report.residual_max)}",
        f"residual_rms: {_fmt(report.residual_rms)}",
        f"objective_supplier: {_fmt(report.objective_supplier)}",
        f"objective_manufacturer: {_fmt(report.objective_manufacturer)}",
        f"objective_retailer: {_fmt(report.objective_retailer)}",
        f"quantity: {_fmt(report.quantity)}",
        f"convexity_warning: {str(report.convexity_warning).lower()}",
        f"negative_investment_warning: {str(report.negative_investment_warning).lower()}",
        f"inner_consistency_delta: {_fmt(report.inner_consistency_delta)}",
    ]
    if report.oracle_max_delta is not None:
        lines.append(f"oracle_max_delta: {_fmt(report.oracle_max_delta)}")
        lines.append(f"oracle_residual_max: {_fmt(report.oracle_residual_max)}")
    return "\n".join(lines) + "\n"


def emit_report(report: SolveReport, path) -> None:
    """Write the report in the documented key: value schema."""
    Path(path).write_text(render_report(report))

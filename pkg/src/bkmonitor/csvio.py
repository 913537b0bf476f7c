"""CSV files for trajectories, error traces and experiment summaries.

Numbers are written with ``repr`` so output is locale independent and
round-trips exactly.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .harness import ErrorTrace, ExperimentSummary, Trajectory

TRAJECTORY_HEADER = ("t", "state_index", "response_index")
TRACE_HEADER = ("t", "kl", "l1", "eps", "maxlog")
SUMMARY_HEADER = ("partition", "trials", "steps", "mean_kl", "max_kl", "final_quartile_kl",
                  "kl_stderr", "eps_max", "gamma_star", "theorem6_bound", "bound_satisfied",
                  "gamma_flat", "flat_bound", "flat_bound_satisfied")


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _writer(f):
    return csv.writer(f, lineterminator="\n")


def write_trajectory(traj: Trajectory, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _writer(f)
        w.writerow(TRAJECTORY_HEADER)
        for t, (s, r) in enumerate(zip(traj.states, traj.responses)):
            w.writerow((t, int(s), int(r)))


def read_trajectory(path: str | os.PathLike) -> Trajectory:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != TRAJECTORY_HEADER:
        raise ValueError(f"{path}: header must be {','.join(TRAJECTORY_HEADER)}")
    body = rows[1:]
    for k, row in enumerate(body):
        if len(row) != 3 or int(row[0]) != k:
            raise ValueError(f"{path}: row {k + 2} is malformed or out of order")
    return Trajectory([int(r[1]) for r in body], [int(r[2]) for r in body])


def trace_header(trace: ErrorTrace) -> tuple[str, ...]:
    return TRACE_HEADER + tuple(f"l1_{c}" for c in trace.clusters)


def write_error_trace(trace: ErrorTrace, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _writer(f)
        w.writerow(trace_header(trace))
        for t in range(len(trace)):
            w.writerow([str(t)] + [_num(v) for v in (trace.kl[t], trace.l1[t], trace.eps[t], trace.maxlog[t])]
                       + [_num(v) for v in trace.cluster_l1[t]])


def read_error_trace(path: str | os.PathLike) -> dict[str, np.ndarray]:
    """Columns of an error-trace CSV keyed by header name."""
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(header))
    return {h: data[:, k] for k, h in enumerate(header)}


def write_summaries(rows: list[tuple[str, ExperimentSummary]], path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _writer(f)
        w.writerow(SUMMARY_HEADER)
        for label, s in rows:
            w.writerow([label] + [_num(getattr(s, k)) for k in SUMMARY_HEADER[1:]])

"""CSV rendering of run, sweep and comparison outcomes.

Every table is rendered to text first and written afterwards, each file via
a temporary sibling and an atomic rename, so a failure never leaves a
partial file behind.
"""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .engine import RunResult, SweepRow
from .metrics import DiffHistogram, diff_histogram

COMM_FIELDS = ("transmissions", "bytes_disseminated", "bytes_aggregated",
               "aggregations_accepted", "aggregations_rejected")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def taskpoints_csv(result: RunResult) -> str:
    return csv_text(("event_index", "count"),
                    ((e, i + 1) for i, e in enumerate(result.taskpoint_events)))


def comm_csv(result: RunResult) -> str:
    rows = [[k, *(getattr(c, f) for f in COMM_FIELDS)]
            for k, c in enumerate(result.robot_comm)]
    rows.append(["total", *(getattr(result.comm, f) for f in COMM_FIELDS)])
    return csv_text(("robot", *COMM_FIELDS), rows)


def matrix_csv(values: np.ndarray, free: np.ndarray | None = None,
               wall: str = "-1") -> str:
    """One CSV row per grid row; walls become ``wall`` when ``free`` is given."""
    header = [f"c{j}" for j in range(values.shape[1])]
    integral = np.issubdtype(values.dtype, np.integer)
    rows = []
    for i in range(values.shape[0]):
        row = []
        for j in range(values.shape[1]):
            if free is not None and not free[i, j]:
                row.append(wall)
            else:
                row.append(str(int(values[i, j])) if integral else _fmt(values[i, j]))
        rows.append(row)
    return csv_text(header, rows)


def heatmap_name(robot: int, step: int) -> str:
    return f"heatmap_{'shared' if robot < 0 else robot}_{step}.csv"


def comm_log_csv(result: RunResult) -> str:
    rows = [(e.step, e.sender_id, e.sender_timestep, " ".join(map(str, e.recipients)),
             e.payload_cells, e.bytes) for e in result.comm_log or ()]
    return csv_text(("step", "sender_id", "sender_timestep", "recipients",
                     "payload_cells", "bytes"), rows)


def run_files(result: RunResult) -> dict[str, str]:
    files = {
        "taskpoints.csv": taskpoints_csv(result),
        "comm.csv": comm_csv(result),
        "cellsteps.csv": matrix_csv(result.cellsteps),
    }
    for hm in result.heatmaps:
        files[heatmap_name(hm.robot, hm.step)] = matrix_csv(hm.values, result.free)
    if result.comm_log is not None:
        files["comm_log.csv"] = comm_log_csv(result)
    files["config.cfg"] = result.config.to_text()
    return files


def sweep_files(rows: Sequence[SweepRow], seeds: Sequence[int]) -> dict[str, str]:
    summary = csv_text(("r_t", "mean_tp", "sd_tp", "mean_tx", "mean_bytes"),
                       ((_fmt(r.r_t), _fmt(r.mean_tp), _fmt(r.sd_tp), _fmt(r.mean_tx),
                         _fmt(r.mean_bytes)) for r in rows))
    per_seed = csv_text(("r_t", "seed", "taskpoints"),
                        ((_fmt(r.r_t), s, tp) for r in rows
                         for s, tp in zip(seeds, r.taskpoints)))
    return {"sweep.csv": summary, "sweep_runs.csv": per_seed}


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if len(values) else 0.0


def ratio_rows(dec: Sequence[RunResult], cen: Sequence[RunResult]) -> list[tuple]:
    """(metric, decentralized mean, centralized mean, ratio) for the headline metrics."""
    metrics = {
        "taskpoints": lambda r: r.taskpoints,
        "transmissions": lambda r: r.comm.transmissions,
        "bytes": lambda r: r.comm.bytes_disseminated,
    }
    out = []
    for name, get in metrics.items():
        d = _mean([get(r) for r in dec])
        c = _mean([get(r) for r in cen])
        out.append((name, d, c, d / c if c else float("nan")))
    return out


def mean_cellsteps_histogram(dec: Sequence[RunResult],
                             cen: Sequence[RunResult]) -> DiffHistogram:
    """Differences between the seed-averaged cellsteps maps of both modes."""
    a = np.mean([r.cellsteps for r in dec], axis=0)
    b = np.mean([r.cellsteps for r in cen], axis=0)
    return diff_histogram(a, b, dec[0].free)


def compare_files(seeds: Sequence[int], dec: Sequence[RunResult],
                  cen: Sequence[RunResult], hist: DiffHistogram) -> dict[str, str]:
    per_seed = csv_text(
        ("seed", "dec_taskpoints", "cen_taskpoints", "dec_tx", "cen_tx",
         "dec_bytes", "cen_bytes"),
        ((s, d.taskpoints, c.taskpoints, d.comm.transmissions, c.comm.transmissions,
          d.comm.bytes_disseminated, c.comm.bytes_disseminated)
         for s, d, c in zip(seeds, dec, cen)))
    ratios = csv_text(("metric", "decentralized", "centralized", "ratio"),
                      ((m, _fmt(d), _fmt(c), _fmt(r)) for m, d, c, r in ratio_rows(dec, cen)))
    histogram = csv_text(("bin_lo", "bin_hi", "count", "relative", "cumulative"),
                         ((_fmt(lo), _fmt(hi), int(n), _fmt(rel), _fmt(cum))
                          for (lo, hi), n, rel, cum in zip(hist.bins, hist.counts,
                                                           hist.relative, hist.cumulative)))
    return {"compare.csv": per_seed, "ratios.csv": ratios, "diff_histogram.csv": histogram}


def write_files(out_dir: str | Path, files: Mapping[str, str]) -> list[Path]:
    """Atomically write each named text into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        path = out / name
        tmp = out / f".{name}.tmp"
        try:
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        finally:
            if tmp.exists():
                tmp.unlink()
        written.append(path)
    return written

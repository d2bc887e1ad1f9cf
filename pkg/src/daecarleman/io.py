"""Plain-text serialization: CSV matrices, JSON documents, trajectory tables."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .simulate import Trajectory


def fmt(v: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    v = float(v)
    if v == 0.0:
        return "0"
    return format(v, ".17g")


def write_matrix_csv(path, A) -> Path:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in A:
            w.writerow([fmt(v) for v in row])
    return path


def read_matrix_csv(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return np.array(rows, dtype=float)


def matrix_document(A) -> dict:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return {"rows": A.shape[0], "cols": A.shape[1], "data": A.tolist()}


def matrix_from_document(doc) -> np.ndarray:
    A = np.array(doc["data"], dtype=float).reshape(doc["rows"], doc["cols"])
    return A


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys, repr-exact floats)."""
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def write_matrix(path_stem, A, fmt_name: str = "csv") -> Path:
    stem = Path(path_stem)
    if fmt_name == "csv":
        return write_matrix_csv(stem.with_suffix(".csv"), A)
    if fmt_name == "json":
        return write_json(stem.with_suffix(".json"), matrix_document(A))
    raise ValueError(f"unknown format {fmt_name!r}")


def write_trajectory_csv(path, traj: Trajectory, xnames=None, znames=None) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(traj.header(xnames, znames))
        for row in traj.table():
            w.writerow([fmt(v) for v in row])
    return path


def read_trajectory_csv(path) -> Trajectory:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    n_x = sum(1 for h in header[1:] if not h.startswith("z"))
    return Trajectory(data[:, 0], data[:, 1 : 1 + n_x], data[:, 1 + n_x :])

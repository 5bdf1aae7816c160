"""File formats: model JSON documents and trajectory/coefficient CSV.

All writers are byte-deterministic: JSON is dumped with sorted keys and
floats keep their shortest round-trip representation, CSV cells are written
with ``repr`` so that a read-back reproduces every value exactly.
"""

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from . import bezier, gaussians, lwr, promp
from .datasets import TrajectorySet


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_json(obj, path):
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


_TO_DICT = {
    gaussians.MixtureModel: gaussians.mixture_to_dict,
    bezier.BezierCurve: bezier.curve_to_dict,
    lwr.LWR: lwr.lwr_to_dict,
    promp.ProMP: promp.promp_to_dict,
}

_FROM_DICT = {
    "gmm-v1": gaussians.mixture_from_dict,
    "bezier-v1": bezier.curve_from_dict,
    "lwr-v1": lwr.lwr_from_dict,
    "promp-v1": promp.promp_from_dict,
}


def model_to_dict(model):
    for cls, encode in _TO_DICT.items():
        if isinstance(model, cls):
            return encode(model)
    raise ValueError(f"cannot serialize object of type {type(model).__name__}")


def model_from_dict(data):
    version = data.get("version")
    decode = _FROM_DICT.get(version)
    if decode is None:
        raise ValueError(f"unknown model version: {version!r}")
    return decode(data)


def save_model(model, path):
    save_json(model_to_dict(model), path)


def load_model(path):
    return model_from_dict(load_json(path))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(value):
    return repr(float(value))


def format_table_csv(header, rows):
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else _fmt(cell)
                         for cell in row])
    return buf.getvalue()


def write_table_csv(header, rows, path):
    Path(path).write_text(format_table_csv(header, rows), encoding="utf-8")


def format_trajectories_csv(trajectory_set):
    dim = trajectory_set.dim
    header = ["traj_id", "t"] + [f"x{d + 1}" for d in range(dim)]
    rows = []
    for traj_id, (times, values) in enumerate(
        zip(trajectory_set.times, trajectory_set.values)
    ):
        for t, point in zip(times, values):
            rows.append([str(traj_id), *(_fmt(v) for v in (t, *point))])
    return format_table_csv(header, rows)


def write_trajectories_csv(trajectory_set, path):
    Path(path).write_text(format_trajectories_csv(trajectory_set), encoding="utf-8")


def read_trajectories_csv(path, allow_empty=False):
    """Parse a trajectory CSV, reporting problems with their line number.

    With ``allow_empty`` a header-only file yields ``None`` instead of an
    error (used by the plotting front end to render empty axes).
    """
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{path}: line 1: missing header") from None
    if len(header) < 3 or header[0] != "traj_id" or header[1] != "t":
        raise ValueError(
            f"{path}: line 1: header must be traj_id,t,x1,...  got {header}"
        )
    dim = len(header) - 2
    demos = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != dim + 2:
            raise ValueError(
                f"{path}: line {lineno}: expected {dim + 2} fields, got {len(row)}"
            )
        try:
            traj_id = int(row[0])
            values = [float(v) for v in row[1:]]
        except ValueError:
            raise ValueError(
                f"{path}: line {lineno}: could not parse numeric fields"
            ) from None
        demos.setdefault(traj_id, []).append((lineno, values))
    if not demos:
        if allow_empty:
            return None
        raise ValueError(f"{path}: no data rows")
    times, points = [], []
    for traj_id in sorted(demos):
        rows = demos[traj_id]
        t = np.array([r[1][0] for r in rows])
        bad = np.nonzero(np.diff(t) <= 0)[0]
        if bad.size:
            lineno = rows[int(bad[0]) + 1][0]
            raise ValueError(
                f"{path}: line {lineno}: time stamps must be strictly "
                f"increasing within trajectory {traj_id}"
            )
        times.append(t)
        points.append(np.array([r[1][1:] for r in rows]))
    return TrajectorySet(tuple(times), tuple(points))


def format_coeffs_csv(coeffs, dom):
    """Coefficient table: flat index, the index vector, and the value."""
    idx = dom.index_set()
    header = ["index"] + [f"k{d + 1}" for d in range(dom.dim)] + ["value"]
    rows = [
        [str(i), *(str(int(k)) for k in idx[i]), _fmt(coeffs[i])]
        for i in range(dom.n_total)
    ]
    return format_table_csv(header, rows)


def write_coeffs_csv(coeffs, dom, path):
    Path(path).write_text(format_coeffs_csv(coeffs, dom), encoding="utf-8")


def read_coeffs_csv(path):
    """Read a coefficient table back to (values, index matrix)."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header is None or header[0] != "index" or header[-1] != "value":
        raise ValueError(f"{path}: line 1: not a coefficient table")
    dim = len(header) - 2
    values, ks = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            ks.append([int(v) for v in row[1:1 + dim]])
            values.append(float(row[-1]))
        except ValueError:
            raise ValueError(
                f"{path}: line {lineno}: could not parse numeric fields"
            ) from None
    return np.asarray(values), np.asarray(ks, dtype=int)

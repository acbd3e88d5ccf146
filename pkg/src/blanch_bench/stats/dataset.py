"""Design matrices pairing depth-resolved stress with colour-change profiles."""

import csv
import json
import re
from dataclasses import dataclass

import numpy as np

from .pls import vip_scores

MIN_OVERLAP_MM = 5.0
MIN_ROWS = 3
_DEPTH_COL = re.compile(r"^depth_(.+)mm$")


@dataclass(frozen=True, eq=False)
class RegressionDataset:
    X: np.ndarray  # (n_lateral, n_depth) von Mises stress, Pa
    y: np.ndarray  # colour change, intensity units
    lateral_coords: np.ndarray  # mm
    depth_coords: np.ndarray  # mm

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        lat = np.array(self.lateral_coords, dtype=float).ravel()
        dep = np.array(self.depth_coords, dtype=float).ravel()
        if X.ndim != 2 or X.shape != (y.size, dep.size) or lat.size != y.size:
            raise ValueError("X must be (len(y), len(depth_coords)) and lateral_coords match y")
        if np.any(np.diff(lat) <= 0):
            raise ValueError("lateral coordinates must be strictly increasing")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains missing or non-finite values")
        for name, arr in (("X", X), ("y", y), ("lateral_coords", lat), ("depth_coords", dep)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_rows(self):
        return self.y.size


def build_design_matrix(grid, profile, min_overlap=MIN_OVERLAP_MM):
    """One row per grid lateral position inside the shared lateral range.

    The profile is linearly interpolated onto the grid's lateral
    coordinates; grid columns are the depths.
    """
    lat = grid.lateral_coords
    pd = np.asarray(profile.distance, dtype=float)
    lo = max(float(lat[0]), float(pd[0]))
    hi = min(float(lat[-1]), float(pd[-1]))
    if hi < lo:
        raise ValueError(
            f"lateral ranges are disjoint: grid [{lat[0]:g}, {lat[-1]:g}] mm, "
            f"profile [{pd[0]:g}, {pd[-1]:g}] mm"
        )
    if hi - lo < min_overlap - 1e-9:
        raise ValueError(f"lateral overlap {hi - lo:g} mm is shorter than {min_overlap:g} mm")
    tol = 1e-9 * max(abs(hi), 1.0)
    rows = np.flatnonzero((lat >= lo - tol) & (lat <= hi + tol))
    if rows.size < MIN_ROWS:
        raise ValueError(f"only {rows.size} usable rows; need at least {MIN_ROWS}")
    x = lat[rows]
    y = np.interp(x, pd, np.asarray(profile.value, dtype=float))
    return RegressionDataset(grid.values[rows], y, x, grid.depth_coords)


def _depth_label(d):
    return f"depth_{round(float(d), 10):g}mm"


def write_dataset_csv(data, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lateral_mm"] + [_depth_label(d) for d in data.depth_coords] + ["color_change"])
        for x, row, yv in zip(data.lateral_coords, data.X, data.y):
            w.writerow([repr(float(x))] + [repr(float(v)) for v in row] + [repr(float(yv))])


def read_dataset_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = [[float(v) for v in row] for row in reader if row]
    if len(header) < 3 or header[0] != "lateral_mm" or header[-1] != "color_change":
        raise ValueError("dataset header must be lateral_mm, depth_<d>mm..., color_change")
    depths = []
    for name in header[1:-1]:
        m = _DEPTH_COL.match(name)
        if not m:
            raise ValueError(f"bad depth column {name!r}")
        depths.append(float(m.group(1)))
    arr = np.array(body, dtype=float).reshape(-1, len(header))
    return RegressionDataset(arr[:, 1:-1], arr[:, -1], arr[:, 0], np.array(depths))


def model_report(model, depth_coords):
    """JSON-ready summary of a fitted PLS model, one entry per depth."""
    vip = vip_scores(model)
    depths = [round(float(d), 10) for d in depth_coords]
    return {
        "n_components": int(model.n_components),
        "requested_components": int(model.requested_components),
        "scaled": model.scaled,
        "r2": float(model.fitted_r2),
        "intercept": float(model.intercept),
        "depth_mm": depths,
        "coefficients": [float(c) for c in model.coefficients],
        "vip": [float(v) for v in vip],
        "vip_gt_1": [bool(v > 1.0) for v in vip],
        "cv_press": {str(k): v for k, v in sorted(model.cv_press.items())},
    }


def write_model_report(model, depth_coords, path):
    with open(path, "w") as fh:
        json.dump(model_report(model, depth_coords), fh, indent=2, sort_keys=True)
        fh.write("\n")

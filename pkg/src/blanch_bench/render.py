"""Heatmap PNGs with a fixed colormap and a JSON scale sidecar."""

import json
from pathlib import Path

import numpy as np
from matplotlib import colormaps
from PIL import Image

COLORMAP = "viridis"


def _lut(name=COLORMAP):
    rgba = colormaps[name](np.linspace(0.0, 1.0, 256))
    return np.rint(rgba[:, :3] * 255).astype(np.uint8)


def heatmap_array(grid_or_map):
    """2-D image array (rows top to bottom) for a VmGrid, ColorChangeMap or array.

    Grids are drawn with depth down the rows and lateral distance across.
    """
    if hasattr(grid_or_map, "depth_coords"):
        return np.asarray(grid_or_map.values, dtype=float).T
    values = getattr(grid_or_map, "values", grid_or_map)
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError("heatmap data must be 2-D")
    return arr


def render_heatmap(grid_or_map, scale, out_path, units=""):
    """Write an 8-bit PNG with a linear colour scale.

    Parameters
    ----------
    grid_or_map : VmGrid, ColorChangeMap or 2-D array
    scale : (float, float)
        Values at the bottom and top of the colormap; outside values clip.
    out_path : path
        PNG destination; the scale is written next to it as ``<out>.json``.

    Returns
    -------
    Path
    """
    arr = heatmap_array(grid_or_map)
    if not np.all(np.isfinite(arr)):
        raise ValueError("heatmap values must be finite")
    vmin, vmax = (float(v) for v in scale)
    if not (np.isfinite(vmin) and np.isfinite(vmax)) or vmax < vmin:
        raise ValueError("scale must be finite with max >= min")
    span = vmax - vmin
    if span > 0:
        idx = np.rint(np.clip((arr - vmin) / span, 0.0, 1.0) * 255).astype(np.intp)
    else:
        idx = np.zeros(arr.shape, dtype=np.intp)
    rgb = _lut()[idx]
    out_path = Path(out_path)
    try:
        Image.fromarray(rgb, mode="RGB").save(out_path, format="PNG")
    except OSError as exc:
        raise OSError(f"cannot write heatmap to {out_path}: {exc}") from exc
    sidecar = {
        "colormap": COLORMAP,
        "scale_min": vmin,
        "scale_max": vmax,
        "units": units,
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
    }
    Path(str(out_path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return out_path

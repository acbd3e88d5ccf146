"""Green-channel colour-change maps and radial profiles from frame stacks.

Frames are 8-bit RGB arrays of shape (rows, cols, 3). Pixel coordinates
are (px, py) = (column, row) with rows increasing downward; angles in the
radial sampling are measured counter-clockwise as seen on screen.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import kernels

MANIFEST_NAME = "manifest.json"
FRAME_PATTERN = "frame_{:06d}.png"
MANIFEST_KEYS = {"fps", "mm_per_pixel", "center_px", "noncontact_window", "contact_window"}


def _window(w, n_frames, name):
    start, stop = (int(v) for v in w)
    if not 0 <= start < stop <= n_frames:
        raise ValueError(f"{name} {start}..{stop} is empty or outside 0..{n_frames}")
    return (start, stop)


@dataclass(frozen=True, eq=False)
class FrameStack:
    """Ordered RGB frames with acquisition metadata.

    Windows are half-open frame ranges ``(start, stop)``.
    """

    frames: np.ndarray  # (n, rows, cols, 3) uint8
    mm_per_pixel: float
    center: tuple  # (px, py)
    noncontact_window: tuple
    contact_window: tuple
    fps: float = 60.0

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 4 or frames.shape[-1] != 3:
            raise ValueError("frames must have shape (n, rows, cols, 3)")
        if frames.dtype != np.uint8:
            raise ValueError("frames must be 8-bit")
        frames = np.ascontiguousarray(frames)
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        if not self.mm_per_pixel > 0 or not self.fps > 0:
            raise ValueError("mm_per_pixel and fps must be positive")
        n = frames.shape[0]
        nc = _window(self.noncontact_window, n, "noncontact_window")
        c = _window(self.contact_window, n, "contact_window")
        if nc[0] < c[1] and c[0] < nc[1]:
            raise ValueError("contact and noncontact windows overlap")
        object.__setattr__(self, "noncontact_window", nc)
        object.__setattr__(self, "contact_window", c)
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @property
    def n_frames(self):
        return self.frames.shape[0]

    @property
    def frame_shape(self):
        return self.frames.shape[1:3]

    def manifest(self):
        return {
            "fps": self.fps,
            "mm_per_pixel": self.mm_per_pixel,
            "center_px": list(self.center),
            "noncontact_window": list(self.noncontact_window),
            "contact_window": list(self.contact_window),
        }


def load_frame_stack(directory):
    """Read ``frame_000000.png ...`` and ``manifest.json`` from a directory."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {directory}")
    meta = json.loads(manifest_path.read_text())
    missing = MANIFEST_KEYS - set(meta)
    unknown = set(meta) - MANIFEST_KEYS
    if missing or unknown:
        raise ValueError(f"manifest keys: missing {sorted(missing)}, unknown {sorted(unknown)}")
    frames = []
    while (directory / FRAME_PATTERN.format(len(frames))).is_file():
        with Image.open(directory / FRAME_PATTERN.format(len(frames))) as im:
            frames.append(np.asarray(im.convert("RGB")))
    if not frames:
        raise FileNotFoundError(f"no frames named like {FRAME_PATTERN.format(0)} in {directory}")
    return FrameStack(
        frames=np.stack(frames),
        mm_per_pixel=float(meta["mm_per_pixel"]),
        center=tuple(meta["center_px"]),
        noncontact_window=tuple(meta["noncontact_window"]),
        contact_window=tuple(meta["contact_window"]),
        fps=float(meta["fps"]),
    )


def save_frame_stack(stack, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(stack.frames):
        Image.fromarray(frame, mode="RGB").save(directory / FRAME_PATTERN.format(i))
    (directory / MANIFEST_NAME).write_text(json.dumps(stack.manifest(), indent=2) + "\n")


def extract_green_channel(frame):
    """Green plane of an RGB frame (or of a stack of frames), unchanged."""
    frame = np.asarray(frame)
    if frame.ndim < 3 or frame.shape[-1] != 3:
        raise ValueError(f"expected 3 channels in the last axis, got shape {frame.shape}")
    return frame[..., 1].copy()


def phase_mean(stack, window):
    """Per-pixel mean of the green channel over frames ``window[0]:window[1]``."""
    start, stop = (int(v) for v in window)
    if stop <= start:
        raise ValueError("empty frame window")
    if start < 0 or stop > stack.n_frames:
        raise ValueError(f"window {start}..{stop} outside 0..{stack.n_frames}")
    green = stack.frames[start:stop, :, :, 1]
    return green.astype(np.float64).mean(axis=0)


@dataclass(frozen=True, eq=False)
class ColorChangeMap:
    """Signed green-channel difference, contact minus noncontact."""

    values: np.ndarray
    mm_per_pixel: float
    center: tuple  # (px, py)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("colour-change map must be 2-D")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.mm_per_pixel > 0:
            raise ValueError("mm_per_pixel must be positive")


def color_change_map(contact_mean, noncontact_mean, mm_per_pixel, center):
    contact_mean = np.asarray(contact_mean, dtype=np.float64)
    noncontact_mean = np.asarray(noncontact_mean, dtype=np.float64)
    if contact_mean.shape != noncontact_mean.shape:
        raise ValueError(f"shape mismatch {contact_mean.shape} vs {noncontact_mean.shape}")
    return ColorChangeMap(contact_mean - noncontact_mean, mm_per_pixel, center)


def mean_maps(maps):
    """Pixelwise mean of several maps sharing dimensions and metadata."""
    maps = list(maps)
    if not maps:
        raise ValueError("no maps to average")
    first = maps[0]
    for m in maps[1:]:
        if m.values.shape != first.values.shape:
            raise ValueError("maps differ in dimensions")
        if m.mm_per_pixel != first.mm_per_pixel or m.center != first.center:
            raise ValueError("maps differ in scale or centre")
    vals = np.mean([m.values for m in maps], axis=0)
    return ColorChangeMap(vals, first.mm_per_pixel, first.center)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    distance: np.ndarray  # mm, signed, symmetric about 0
    value: np.ndarray
    n_angles: int = 0  # ray directions covered (two per segment)


@dataclass(frozen=True, eq=False)
class HalfProfile:
    distance: np.ndarray  # mm, from 0 outward
    value: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.array(self.distance, dtype=float)
        v = np.array(self.value, dtype=float)
        if d.shape != v.shape or d.ndim != 1:
            raise ValueError("distance and value must be 1-D of equal length")
        if d.size and (d[0] < -1e-12 or np.any(np.diff(d) <= 0)):
            raise ValueError("half-profile distances must start at >= 0 and increase")
        d.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "distance", d)
        object.__setattr__(self, "value", v)


def radial_profile(cmap, length=14.0, angle_step=20.0, samples=None):
    """Angle-averaged profile along segments through the map centre.

    Parameters
    ----------
    cmap : ColorChangeMap
    length : float
        Segment length in mm, centred on the convexity.
    angle_step : float
        Degrees between segments; angles cover [0, 180).
    samples : int, optional
        Points per segment; default spaces samples one pixel apart.

    Returns
    -------
    RadialProfile
    """
    if not length > 0 or not 0 < angle_step <= 180:
        raise ValueError("length must be positive and angle_step in (0, 180]")
    if samples is None:
        samples = int(round(length / cmap.mm_per_pixel)) + 1
    if samples < 2:
        raise ValueError("need at least two samples per segment")
    half = 0.5 * length
    dist = np.linspace(-half, half, samples)
    angles = np.arange(0.0, 180.0 - 1e-9, angle_step)
    theta = np.deg2rad(angles)
    r_px = dist / cmap.mm_per_pixel
    cx, cy = cmap.center
    cols = cx + np.outer(np.cos(theta), r_px)
    rows = cy - np.outer(np.sin(theta), r_px)
    n_rows, n_cols = cmap.values.shape
    eps = 1e-9
    if rows.min() < -eps or cols.min() < -eps or rows.max() > n_rows - 1 + eps or cols.max() > n_cols - 1 + eps:
        raise ValueError("sampling segment leaves the image")
    vals = kernels.bilinear_sample(cmap.values, rows, cols).reshape(angles.size, samples)
    # each segment runs both ways from the centre, so it covers two ray directions
    return RadialProfile(dist, vals.mean(axis=0), int(2 * angles.size))


def fold_profile(profile):
    """Average the two sides of a symmetric profile into a one-sided profile."""
    d = np.asarray(profile.distance, dtype=float)
    v = np.asarray(profile.value, dtype=float)
    scale = max(float(np.abs(d).max()), 1.0) if d.size else 1.0
    if d.size < 2 or not np.allclose(d, -d[::-1], rtol=0, atol=1e-9 * scale):
        raise ValueError("profile sampling is not symmetric about zero")
    folded = 0.5 * (v + v[::-1])
    mid = d.size // 2
    half_d = 0.5 * (d[mid:] - d[::-1][mid:])
    return HalfProfile(half_d, folded[mid:])


def analyze_stack(stack, length=14.0, angle_step=20.0, samples=None):
    """Phase means, difference map and radial profiles of one frame stack."""
    contact = phase_mean(stack, stack.contact_window)
    noncontact = phase_mean(stack, stack.noncontact_window)
    cmap = color_change_map(contact, noncontact, stack.mm_per_pixel, stack.center)
    radial = radial_profile(cmap, length, angle_step, samples)
    return cmap, radial, fold_profile(radial)


def write_map(cmap, path):
    """Write values as little-endian float32 plus a ``.json`` sidecar."""
    path = Path(path)
    cmap.values.astype("<f4").tofile(path)
    sidecar = {
        "rows": int(cmap.values.shape[0]),
        "cols": int(cmap.values.shape[1]),
        "dtype": "float32-le",
        "mm_per_pixel": cmap.mm_per_pixel,
        "center_px": list(cmap.center),
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def read_map(path):
    path = Path(path)
    meta = json.loads(Path(str(path) + ".json").read_text())
    vals = np.fromfile(path, dtype="<f4")
    if vals.size != meta["rows"] * meta["cols"]:
        raise ValueError("map file size does not match its sidecar")
    return ColorChangeMap(
        vals.reshape(meta["rows"], meta["cols"]).astype(np.float64),
        float(meta["mm_per_pixel"]),
        tuple(meta["center_px"]),
    )


def write_profile_csv(profile, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["distance_mm", "value"])
        for d, v in zip(profile.distance, profile.value):
            w.writerow([repr(float(d)), repr(float(v))])


def read_profile_csv(path):
    """Read a one-sided profile written by :func:`write_profile_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["distance_mm", "value"]:
            raise ValueError(f"unexpected profile header {header}")
        rows = np.array([[float(x) for x in row] for row in reader if row])
    if rows.size == 0:
        raise ValueError("profile file has no data rows")
    return HalfProfile(rows[:, 0], rows[:, 1])

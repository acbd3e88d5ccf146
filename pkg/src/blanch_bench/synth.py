"""Synthetic colour-change observations generated from stress grids.

The forward model is a weighted sum over depth of the von Mises stress,
scaled by a gain and corrupted by Gaussian noise. It provides a known
ground truth for the imaging and regression stages.
"""

from dataclasses import dataclass

import numpy as np

from .imaging import ColorChangeMap, FrameStack, HalfProfile

PRESETS = ("papillary", "uniform")
PAPILLARY_CENTER_MM = 0.1
PAPILLARY_WIDTH_MM = 0.07


@dataclass(frozen=True, eq=False)
class ForwardModel:
    depth_weights: np.ndarray  # one nonnegative weight per grid depth
    gain: float = 1.0  # intensity per Pa
    noise_sigma: float = 0.0  # intensity units
    seed: int = 0

    def __post_init__(self):
        w = np.array(self.depth_weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("depth_weights must be a nonempty vector")
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError("depth_weights must be nonnegative and not all zero")
        if not self.gain > 0:
            raise ValueError("gain must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "depth_weights", w)

    def with_noise(self, noise_sigma, seed=None):
        return ForwardModel(self.depth_weights, self.gain, noise_sigma, self.seed if seed is None else seed)


def preset_weights(name, depth_coords):
    """Ground-truth depth weights, normalised to unit sum.

    ``papillary`` is a Gaussian bump around the shallow capillary loops;
    ``uniform`` weighs all depths equally.
    """
    d = np.asarray(depth_coords, dtype=float)
    if name == "papillary":
        w = np.exp(-0.5 * ((d - PAPILLARY_CENTER_MM) / PAPILLARY_WIDTH_MM) ** 2)
    elif name == "uniform":
        w = np.ones_like(d)
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    return w / w.sum()


def noise_sigma_for_snr(signal, snr_db):
    """Noise standard deviation giving ``snr_db`` relative to the signal's spread.

    SNR is the ratio of the signal variance (about its mean) to the noise
    variance, in decibels.
    """
    s = np.std(np.asarray(signal, dtype=float))
    return float(s / 10.0 ** (snr_db / 20.0))


def forward_color_profile(grid, model):
    """Colour change at each lateral grid position.

    value(x) = gain * sum_d w(d) vm(x, d) + noise
    """
    w = model.depth_weights
    if w.size != grid.depth_coords.size:
        raise ValueError(f"{w.size} depth weights for a grid with {grid.depth_coords.size} depths")
    clean = model.gain * (grid.values @ w)
    rng = np.random.default_rng(model.seed)
    noise = rng.normal(0.0, model.noise_sigma, clean.size) if model.noise_sigma > 0 else 0.0
    return HalfProfile(grid.lateral_coords, clean + noise)


def radial_map_from_profile(profile, shape, mm_per_pixel, center=None):
    """Radially symmetric map whose value at radius r follows ``profile``.

    Radii beyond the profile hold its last value.
    """
    rows, cols = shape
    if center is None:
        center = ((cols - 1) / 2.0, (rows - 1) / 2.0)
    cx, cy = center
    yy, xx = np.mgrid[0:rows, 0:cols]
    r = np.hypot(xx - cx, yy - cy) * mm_per_pixel
    vals = np.interp(r, profile.distance, profile.value)
    return ColorChangeMap(vals, mm_per_pixel, center)


def synth_frame_stack(
    profile_2d,
    baseline=100.0,
    fps=60.0,
    windows=((0, 100), (100, 200)),
    frame_noise=0.0,
    seed=0,
    red_level=150,
    blue_level=90,
):
    """Frames whose green channel carries ``profile_2d`` during contact.

    Parameters
    ----------
    profile_2d : ColorChangeMap
        Planted colour change (intensity units).
    baseline : float
        Green level without contact.
    windows : ((int, int), (int, int))
        Noncontact and contact frame ranges; frames outside both carry
        the baseline.
    frame_noise : float
        Per-pixel, per-frame Gaussian noise sigma.

    Returns
    -------
    FrameStack

    Raises
    ------
    ValueError
        If the signal plus 3 sigma of noise does not fit the 8-bit range.
    """
    signal = profile_2d.values
    headroom = 3.0 * frame_noise
    lo = baseline + min(float(signal.min()), 0.0) - headroom
    hi = baseline + max(float(signal.max()), 0.0) + headroom
    if lo < 0.0 or hi > 255.0:
        raise ValueError(f"signal range [{lo:.1f}, {hi:.1f}] with noise headroom exceeds 0..255")
    (nc0, nc1), (c0, c1) = windows
    n = max(nc1, c1)
    rows, cols = signal.shape
    rng = np.random.default_rng(seed)
    frames = np.empty((n, rows, cols, 3), dtype=np.uint8)
    frames[..., 0] = red_level
    frames[..., 2] = blue_level
    for i in range(n):
        g = np.full((rows, cols), float(baseline))
        if c0 <= i < c1:
            g += signal
        if frame_noise > 0:
            g += rng.normal(0.0, frame_noise, g.shape)
        frames[i, :, :, 1] = np.clip(np.rint(g), 0, 255).astype(np.uint8)
    return FrameStack(frames, profile_2d.mm_per_pixel, profile_2d.center, (nc0, nc1), (c0, c1), fps)

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from PIL import Image

from blanch_bench.fem import VmGrid
from blanch_bench.imaging import ColorChangeMap, HalfProfile, analyze_stack, color_change_map, phase_mean
from blanch_bench.render import _lut, heatmap_array, render_heatmap
from blanch_bench.synth import (
    ForwardModel,
    forward_color_profile,
    noise_sigma_for_snr,
    preset_weights,
    radial_map_from_profile,
    synth_frame_stack,
)

LAT = np.round(np.arange(71) * 0.1, 10)
DEP = np.round(np.arange(21) * 0.1, 10)


def _grid(values):
    return VmGrid(LAT, DEP, values, 0.1)


@pytest.fixture
def random_grid(rng):
    return _grid(rng.uniform(0, 5e4, (71, 21)))


def test_delta_weights_pick_top_row(random_grid):
    w = np.zeros(21)
    w[0] = 1.0
    prof = forward_color_profile(random_grid, ForwardModel(w, gain=2e-4))
    assert_allclose(prof.value, 2e-4 * random_grid.values[:, 0], rtol=1e-15)
    assert_array_equal(prof.distance, LAT)


def test_zero_grid_gives_pure_noise():
    prof = forward_color_profile(_grid(np.zeros((71, 21))), ForwardModel(np.ones(21), 1.0, noise_sigma=2.0, seed=3))
    assert abs(np.std(prof.value, ddof=1) / 2.0 - 1) <= 0.15


def test_same_seed_same_profile(random_grid):
    m = ForwardModel(preset_weights("papillary", DEP), 1e-4, 0.5, seed=11)
    assert_array_equal(forward_color_profile(random_grid, m).value, forward_color_profile(random_grid, m).value)
    other = forward_color_profile(random_grid, m.with_noise(0.5, seed=12)).value
    assert not np.array_equal(other, forward_color_profile(random_grid, m).value)


def test_linear_in_gain_and_grid(rng, random_grid):
    w = rng.uniform(0, 1, 21)
    other = _grid(rng.uniform(0, 5e4, (71, 21)))
    summed = _grid(random_grid.values + 3 * other.values)
    f = lambda g, gain=1.0: forward_color_profile(g, ForwardModel(w, gain)).value  # noqa: E731
    assert_allclose(f(summed), f(random_grid) + 3 * f(other), rtol=1e-12)
    assert_allclose(f(random_grid, 4.0), 4 * f(random_grid), rtol=1e-14)


def test_weight_length_mismatch(random_grid):
    with pytest.raises(ValueError):
        forward_color_profile(random_grid, ForwardModel(np.ones(5)))


@pytest.mark.parametrize("kwargs", [dict(depth_weights=np.zeros(3)), dict(depth_weights=-np.ones(3)), dict(gain=0.0), dict(noise_sigma=-1.0)])
def test_forward_model_invariants(kwargs):
    base = dict(depth_weights=np.ones(3))
    base.update(kwargs)
    with pytest.raises(ValueError):
        ForwardModel(**base)


def test_presets():
    w = preset_weights("papillary", DEP)
    assert w.sum() == pytest.approx(1.0)
    assert np.argmax(w) == 1  # 0.1 mm
    assert w[DEP < 0.3].sum() > 0.95
    assert_allclose(preset_weights("uniform", DEP), 1 / 21)
    with pytest.raises(ValueError):
        preset_weights("dermal", DEP)


def test_snr_definition():
    s = np.array([1.0, -1.0] * 50)
    assert noise_sigma_for_snr(s, 20.0) == pytest.approx(0.1)
    assert noise_sigma_for_snr(s, 0.0) == pytest.approx(1.0)


def _planted_map(n=141, mpp=0.1):
    prof = HalfProfile(LAT, 12.0 * np.exp(-0.5 * (LAT / 2.0) ** 2))
    return radial_map_from_profile(prof, (n, n), mpp)


def test_radial_map_from_profile():
    m = _planted_map()
    assert m.values[70, 70] == pytest.approx(12.0)
    assert m.values[70, 90] == pytest.approx(12.0 * np.exp(-0.5))
    assert_allclose(m.values, m.values.T)


def test_noise_free_frames_round_trip():
    m = _planted_map()
    stack = synth_frame_stack(m)
    assert stack.noncontact_window == (0, 100) and stack.contact_window == (100, 200)
    cmap = color_change_map(phase_mean(stack, stack.contact_window), phase_mean(stack, stack.noncontact_window), m.mm_per_pixel, m.center)
    assert np.abs(cmap.values - m.values).max() <= 0.5
    assert np.all(stack.frames[..., 0] == 150) and np.all(stack.frames[..., 2] == 90)


def test_noisy_frames_recover_map():
    m = _planted_map()
    stack = synth_frame_stack(m, frame_noise=4.0, seed=5)
    cmap, _, _ = analyze_stack(stack)
    assert np.sqrt(np.mean((cmap.values - m.values) ** 2)) <= 1.0


def test_frame_headroom_check():
    m = ColorChangeMap(np.full((5, 5), 160.0), 0.1, (2, 2))
    with pytest.raises(ValueError):
        synth_frame_stack(m, baseline=100.0)
    with pytest.raises(ValueError):
        synth_frame_stack(ColorChangeMap(np.zeros((5, 5)), 0.1, (2, 2)), baseline=5.0, frame_noise=4.0)


def test_heatmap_constant_field(tmp_path):
    out = render_heatmap(np.full((4, 6), 3.0), (0.0, 6.0), tmp_path / "c.png", units="Pa")
    img = np.asarray(Image.open(out))
    assert img.shape == (4, 6, 3) and img.dtype == np.uint8
    assert np.all(img == img[0, 0])
    side = json.loads((tmp_path / "c.png.json").read_text())
    assert side["scale_min"] == 0.0 and side["scale_max"] == 6.0 and side["colormap"] == "viridis"


def test_heatmap_extremes(tmp_path):
    out = render_heatmap(np.array([[0.0, 10.0]]), (0.0, 10.0), tmp_path / "e.png")
    img = np.asarray(Image.open(out))
    lut = _lut()
    assert_array_equal(img[0, 0], lut[0])
    assert_array_equal(img[0, 1], lut[-1])


def test_heatmap_bytes_are_reproducible(tmp_path, random_grid):
    a = render_heatmap(random_grid, (0, 5e4), tmp_path / "a.png")
    b = render_heatmap(random_grid, (0, 5e4), tmp_path / "b.png")
    assert a.read_bytes() == b.read_bytes()
    # depth runs down the rows
    assert heatmap_array(random_grid).shape == (21, 71)


def test_heatmap_errors(tmp_path):
    with pytest.raises(ValueError):
        render_heatmap(np.array([[np.nan]]), (0, 1), tmp_path / "n.png")
    with pytest.raises(OSError):
        render_heatmap(np.zeros((2, 2)), (0, 1), tmp_path / "missing" / "x.png")

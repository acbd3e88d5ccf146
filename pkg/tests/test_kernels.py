"""Compiled and pure-Python kernels must agree; the dispatcher must pick one."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from blanch_bench import kernels

BACKENDS = kernels.backends()
needs_both = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def test_backend_flag_names_an_available_module():
    assert kernels.BACKEND in BACKENDS


def _random_mesh(rng, n=6):
    x, y = np.meshgrid(np.linspace(0, 1, n), np.linspace(0, 1, n))
    xy = np.column_stack([x.ravel(), y.ravel()])
    xy[:, :] += rng.uniform(-0.03, 0.03, xy.shape) * (np.abs(xy - 0.5) < 0.49)
    tri = []
    for j in range(n - 1):
        for i in range(n - 1):
            a = j * n + i
            tri += [[a, a + 1, a + n + 1], [a, a + n + 1, a + n]]
    return xy, np.array(tri)


@needs_both
def test_stiffness_triplets_agree(rng):
    xy, tri = _random_mesh(rng)
    E = rng.uniform(0.01, 2.0, len(tri))
    nu = rng.uniform(0.0, 0.49, len(tri))
    out = [BACKENDS[k].cst_stiffness_triplets(xy, tri, E, nu) for k in ("python", "cython")]
    for a, b in zip(*out):
        assert_allclose(a, b, rtol=1e-13, atol=1e-15)


@needs_both
def test_stress_agrees(rng):
    xy, tri = _random_mesh(rng)
    E = rng.uniform(0.01, 2.0, len(tri))
    nu = rng.uniform(0.0, 0.49, len(tri))
    u = rng.normal(size=xy.shape)
    a = kernels.cst_stress(xy, tri, E, nu, u, impl=BACKENDS["python"])
    b = kernels.cst_stress(xy, tri, E, nu, u, impl=BACKENDS["cython"])
    assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("impl", sorted(BACKENDS))
def test_locator_finds_containing_triangle(impl, rng):
    xy, tri = _random_mesh(rng, 8)
    loc = kernels.PointLocator(xy, tri)
    pts = rng.uniform(0.05, 0.95, (300, 2))
    elem, bary = loc.locate(pts, impl=BACKENDS[impl])
    assert np.all(elem >= 0)
    assert_allclose(bary.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(bary > -1e-9)
    recon = np.einsum("ij,ijk->ik", bary, xy[tri[elem]])
    assert_allclose(recon, pts, atol=1e-12)


@pytest.mark.parametrize("impl", sorted(BACKENDS))
def test_locator_reports_outside_points(impl, rng):
    xy, tri = _random_mesh(rng)
    loc = kernels.PointLocator(xy, tri)
    elem, _ = loc.locate(np.array([[2.0, 0.5], [-0.5, -0.5]]), impl=BACKENDS[impl])
    assert_array_equal(elem, [-1, -1])


@pytest.mark.parametrize("impl", sorted(BACKENDS))
def test_bilinear_reproduces_affine_images(impl):
    r, c = np.mgrid[0:20, 0:30]
    img = 3.0 + 0.5 * r - 0.25 * c
    rows = np.array([0.0, 4.5, 18.99, 19.0, 7.25])
    cols = np.array([0.0, 3.3, 28.5, 29.0, 0.75])
    got = kernels.bilinear_sample(img, rows, cols, impl=BACKENDS[impl])
    assert_allclose(got, 3.0 + 0.5 * rows - 0.25 * cols, rtol=1e-14)


@needs_both
@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(0, 9), min_size=1, max_size=20),
    st.lists(st.floats(0, 11), min_size=1, max_size=20),
    st.integers(0, 2**31 - 1),
)
def test_bilinear_backends_agree(rows, cols, seed):
    n = min(len(rows), len(cols))
    img = np.random.default_rng(seed).normal(size=(10, 12))
    a = kernels.bilinear_sample(img, rows[:n], cols[:n], impl=BACKENDS["python"])
    b = kernels.bilinear_sample(img, rows[:n], cols[:n], impl=BACKENDS["cython"])
    assert_allclose(a, b, rtol=1e-13, atol=1e-13)

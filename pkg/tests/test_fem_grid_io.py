import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from blanch_bench.fem import StressField, VmGrid, interpolate_nodal, resample_vm_grid
from blanch_bench.fem.io import read_mesh_csv, read_vm_grid_csv, write_mesh_csv, write_solve_log, write_vm_grid_csv


def _field(mesh, vm):
    vm = np.broadcast_to(np.asarray(vm, float), (mesh.n_elements,)).copy()
    return StressField(np.zeros((mesh.n_elements, 4)), vm)


def test_constant_field_resamples_to_constant(coarse_ridged_mesh):
    grid = resample_vm_grid(_field(coarse_ridged_mesh, 1234.5), coarse_ridged_mesh)
    assert_allclose(grid.values, 1234.5, rtol=1e-13)


def test_default_grid_axes(coarse_ridged_mesh):
    grid = resample_vm_grid(_field(coarse_ridged_mesh, 1.0), coarse_ridged_mesh)
    assert grid.shape == (71, 21)
    assert grid.lateral_coords[0] == 0.0 and grid.lateral_coords[-1] == pytest.approx(7.0)
    assert grid.depth_coords[0] == 0.0 and grid.depth_coords[-1] == pytest.approx(2.0)
    assert grid.spacing == 0.1


def test_one_millimetre_spacing(coarse_ridged_mesh):
    grid = resample_vm_grid(_field(coarse_ridged_mesh, 1.0), coarse_ridged_mesh, spacing=1.0)
    assert grid.shape == (8, 3)


def test_linear_nodal_field_is_reproduced(coarse_flat_mesh):
    mesh = coarse_flat_mesh
    vals = 3.0 + 2.0 * mesh.nodes[:, 0] - 5.0 * mesh.nodes[:, 1]
    pts = np.array([[0.13, -0.27], [-4.4, -1.9], [6.99, -0.01], [0.0, -3.3]])
    assert_allclose(interpolate_nodal(mesh, vals, pts), 3.0 + 2.0 * pts[:, 0] - 5.0 * pts[:, 1], rtol=1e-12)


def test_nodal_linear_field_gives_linear_samples(coarse_flat_mesh):
    from blanch_bench.kernels import PointLocator

    mesh = coarse_flat_mesh
    vals = 10.0 + mesh.nodes[:, 0]
    loc = PointLocator(mesh.nodes, mesh.elements)
    x = np.linspace(0, 7, 71)
    pts = np.column_stack([x, np.full_like(x, -0.5)])
    assert_allclose(interpolate_nodal(mesh, vals, pts, loc), 10.0 + x, rtol=1e-12)


def test_point_outside_mesh_raises(coarse_flat_mesh):
    with pytest.raises(ValueError):
        interpolate_nodal(coarse_flat_mesh, np.zeros(coarse_flat_mesh.n_nodes), np.array([[0.0, 1.0]]))
    with pytest.raises(ValueError):
        resample_vm_grid(_field(coarse_flat_mesh, 1.0), coarse_flat_mesh, region=(30.0, 2.0))


def test_mirror_averaging_makes_grid_symmetric_source_irrelevant(coarse_flat_mesh):
    mesh = coarse_flat_mesh
    cx = mesh.centroids()[:, 0]
    left = resample_vm_grid(_field(mesh, np.where(cx < 0, 2.0, 0.0)), mesh)
    right = resample_vm_grid(_field(mesh, np.where(cx > 0, 2.0, 0.0)), mesh)
    assert_allclose(left.values, right.values, atol=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(values=-np.ones((3, 2))),
        dict(values=np.full((3, 2), np.nan)),
        dict(values=np.ones((2, 2))),
        dict(lateral_coords=np.array([0.0, 0.2, 0.1])),
    ],
)
def test_vm_grid_invariants(kwargs):
    base = dict(lateral_coords=np.array([0.0, 0.1, 0.2]), depth_coords=np.array([0.0, 0.1]), values=np.ones((3, 2)), spacing=0.1)
    base.update(kwargs)
    with pytest.raises(ValueError):
        VmGrid(**base)


def test_vm_grid_csv_round_trip(tmp_path, rng):
    grid = VmGrid(np.arange(8) * 1.0, np.arange(3) * 1.0, rng.uniform(0, 5e4, (8, 3)), 1.0)
    path = tmp_path / "g.csv"
    write_vm_grid_csv(grid, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "lateral_mm,depth_mm,von_mises_pa"
    assert lines[1].startswith("0,0,") and lines[2].startswith("0,1,")
    back = read_vm_grid_csv(path)
    assert_array_equal(back.values, grid.values)
    assert_array_equal(back.lateral_coords, grid.lateral_coords)
    assert back.spacing == 1.0


def test_vm_grid_csv_rejects_wrong_order(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("lateral_mm,depth_mm,von_mises_pa\n0,0,1\n1,0,1\n0,1,1\n1,1,1\n")
    with pytest.raises(ValueError):
        read_vm_grid_csv(path)


def test_mesh_csv_round_trip(tmp_path, coarse_ridged_mesh):
    mesh = coarse_ridged_mesh
    write_mesh_csv(mesh, tmp_path / "n.csv", tmp_path / "e.csv")
    assert (tmp_path / "n.csv").read_text().splitlines()[0] == "id,x,y"
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "id,n1,n2,n3,material"
    back = read_mesh_csv(tmp_path / "n.csv", tmp_path / "e.csv")
    assert_array_equal(back.nodes, mesh.nodes)
    assert_array_equal(back.elements, mesh.elements)
    assert_array_equal(back.material, mesh.material)
    for tag in ("surface", "bottom", "left", "right"):
        assert_array_equal(getattr(back, tag), getattr(mesh, tag))


def test_solve_log_json(tmp_path, coarse_solution):
    _, sol = coarse_solution
    write_solve_log(sol, tmp_path / "log.json", extra={"label": "d3_h1"})
    log = json.loads((tmp_path / "log.json").read_text())
    assert log["label"] == "d3_h1"
    assert len(log["steps"]) == 20
    assert {"residual", "contact_nodes", "total_reaction"} <= set(log["steps"][0])

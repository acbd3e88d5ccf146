import numpy as np
import pytest
from numpy.testing import assert_allclose

from blanch_bench.fem import FingerSectionGeometry, IndenterSpec, MaterialTable, build_finger_mesh, protocol_conditions
from blanch_bench.fem.materials import LAYERS


def test_default_material_table_values():
    tab = MaterialTable()
    expected = {
        "epidermis": (0.136e6, 0.48),
        "dermis": (0.080e6, 0.48),
        "subcutaneous": (0.034e6, 0.48),
        "bone": (17000e6, 0.30),
        "nail": (170e6, 0.30),
    }
    for name, (E, nu) in expected.items():
        m = tab[tab.id_of(name)]
        assert m.elastic_modulus == pytest.approx(E)
        assert m.poisson_ratio == nu


@pytest.mark.parametrize("E, nu", [(0.0, 0.3), (-1.0, 0.3), (1.0, 0.5), (1.0, -0.1)])
def test_material_invariants(E, nu):
    with pytest.raises(ValueError):
        MaterialTable.homogeneous(E, nu)


def test_material_dict_round_trip_and_unknown_keys():
    tab = MaterialTable().scaled(2.0)
    assert MaterialTable.from_dict(tab.to_dict()).to_dict() == tab.to_dict()
    with pytest.raises(ValueError):
        MaterialTable.from_dict({"epidermis": {"elastic_modulus": 1.0, "poisson_ratio": 0.3, "colour": 1}})
    with pytest.raises(ValueError):
        MaterialTable.from_dict({"tendon": {"elastic_modulus": 1.0, "poisson_ratio": 0.3}})


def test_layer_names():
    assert LAYERS == ("epidermis", "dermis", "subcutaneous", "bone", "nail")


def test_indenter_label_and_validation():
    assert IndenterSpec(5.0, 2.0).label == "d5_h2"
    with pytest.raises(ValueError):
        IndenterSpec(3.0, 1.0, corner_fillet=0.0)
    with pytest.raises(ValueError):
        IndenterSpec(3.0, -1.0)


def test_protocol_order():
    assert protocol_conditions() == [(5, 2), (5, 1), (4, 2), (4, 1), (3, 2), (3, 1), (2, 2), (2, 1)]


def test_domain_must_be_four_indenter_widths():
    g = FingerSectionGeometry()
    g.check_indenter(5.0)
    with pytest.raises(ValueError):
        g.check_indenter(5.1)


def test_positive_orientation_and_conformity(coarse_ridged_mesh):
    mesh = coarse_ridged_mesh
    assert np.all(mesh.signed_areas() > 0)
    _, counts = mesh.edges()
    assert counts.max() == 2
    # boundary edges = edges used once; Euler check for a simply connected domain
    n_edges = counts.size
    assert mesh.n_nodes - n_edges + mesh.n_elements == 1


def test_flat_slab_layer_assignment(coarse_flat_mesh):
    mesh = coarse_flat_mesh
    depth = -mesh.centroids()[:, 1]
    tab = MaterialTable()
    assert np.all(mesh.material[depth < 0.7] == tab.id_of("epidermis"))
    assert np.all(mesh.material[(depth > 0.7) & (depth < 1.9)] == tab.id_of("dermis"))
    assert np.all(mesh.material[depth > 1.9] == tab.id_of("subcutaneous"))


def test_ridged_layer_assignment_follows_nominal_depth(coarse_ridged_mesh):
    mesh = coarse_ridged_mesh
    depth = -mesh.centroids()[:, 1]
    ids = np.searchsorted([0.7, 1.9], depth, side="right")
    assert np.array_equal(mesh.material, ids)


def test_ridge_peak_to_valley(coarse_ridged_mesh):
    y = coarse_ridged_mesh.nodes[coarse_ridged_mesh.surface, 1]
    assert y.max() - y.min() == pytest.approx(0.1, abs=1e-12)
    assert y.max() == pytest.approx(0.0, abs=1e-12)


def test_surface_edges_respect_refinement(coarse_ridged_mesh):
    mesh = coarse_ridged_mesh
    edges, _ = mesh.edges()
    p = mesh.nodes[edges]
    length = np.hypot(*(p[:, 1] - p[:, 0]).T)
    near = np.min(-p[:, :, 1], axis=1) < 0.5
    assert near.sum() > 100
    assert length[near].max() <= mesh.surface_refine + 1e-12


def test_boundary_tags(coarse_flat_mesh):
    mesh = coarse_flat_mesh
    assert_allclose(mesh.nodes[mesh.bottom, 1], -5.9)
    # the width is rounded up to whole coarse cells
    assert 10.0 <= mesh.half_width <= 10.0 + mesh.target_edge
    assert_allclose(mesh.nodes[mesh.left, 0], -mesh.half_width)
    assert_allclose(mesh.nodes[mesh.right, 0], mesh.half_width)
    assert_allclose(mesh.nodes[mesh.surface, 1], 0.0)
    assert np.all(np.diff(mesh.nodes[mesh.surface, 0]) > 0)


def test_mirror_symmetric_nodes(coarse_ridged_mesh):
    xy = coarse_ridged_mesh.nodes
    a = np.lexsort((xy[:, 1], xy[:, 0]))
    mirrored = xy * [-1, 1]
    b = np.lexsort((mirrored[:, 1], mirrored[:, 0]))
    assert_allclose(xy[a], mirrored[b], atol=1e-12)


def test_halving_target_edge_scales_element_count():
    g = FingerSectionGeometry(ridges_enabled=False)
    coarse = build_finger_mesh(g, 0.4, 0.1)
    fine = build_finger_mesh(g, 0.2, 0.05)
    ratio = fine.n_elements / coarse.n_elements
    assert 3.0 <= ratio <= 5.0


@pytest.mark.parametrize("edge, refine", [(0.2, 0.2), (0.1, 0.2), (0.2, 0.0)])
def test_rejects_bad_refinement(edge, refine):
    with pytest.raises(ValueError):
        build_finger_mesh(FingerSectionGeometry(), edge, refine)


def test_rejects_unresolvable_layer():
    with pytest.raises(ValueError):
        build_finger_mesh(FingerSectionGeometry(epidermis=0.04, ridges_enabled=False), 0.2, 0.05)

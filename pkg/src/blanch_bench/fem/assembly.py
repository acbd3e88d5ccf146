"""Plane-strain linear elasticity assembly with constant-strain triangles.

Internal units are mm and MPa (N/mm^2), so stiffness is N/mm per mm of
out-of-plane thickness. Material tables hold Pa and are converted here.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import kernels

PA_PER_MPA = 1.0e6


@dataclass(frozen=True, eq=False)
class StiffnessSystem:
    K: sp.csr_matrix  # (2n, 2n), unconstrained
    E: np.ndarray  # per element, MPa
    nu: np.ndarray  # per element

    @property
    def n_dof(self):
        return self.K.shape[0]


def element_properties(mesh, materials):
    """Per-element modulus (MPa) and Poisson ratio."""
    ids = np.unique(mesh.material)
    for i in ids:
        try:
            materials[int(i)]
        except KeyError:
            raise ValueError(f"element material id {int(i)} missing from material table") from None
    E_tab = np.array([m.elastic_modulus for m in materials.entries]) / PA_PER_MPA
    nu_tab = np.array([m.poisson_ratio for m in materials.entries])
    return E_tab[mesh.material], nu_tab[mesh.material]


def assemble_system(mesh, materials):
    area = mesh.signed_areas()
    scale = np.abs(area).max() if area.size else 1.0
    if np.any(area <= 1e-14 * scale):
        bad = int(np.argmin(area))
        raise ValueError(f"degenerate or inverted element {bad} (signed area {area[bad]:.3e})")
    E, nu = element_properties(mesh, materials)
    rows, cols, vals = kernels.cst_stiffness_triplets(mesh.nodes, mesh.elements, E, nu)
    n = 2 * mesh.n_nodes
    K = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    return StiffnessSystem(K, E, nu)

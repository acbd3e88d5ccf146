"""Element stress recovery and von Mises equivalent stress."""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from .assembly import PA_PER_MPA, element_properties


def von_mises(sxx, syy, sxy, szz):
    """Von Mises stress of a plane stress state with out-of-plane normal ``szz``.

    Works elementwise on arrays.
    """
    sxx, syy, sxy, szz = (np.asarray(a, dtype=float) for a in (sxx, syy, sxy, szz))
    return np.sqrt(0.5 * ((sxx - syy) ** 2 + (syy - szz) ** 2 + (szz - sxx) ** 2) + 3.0 * sxy**2)


@dataclass(frozen=True, eq=False)
class StressField:
    stress: np.ndarray  # (ne, 4): sxx, syy, sxy, szz in Pa, at element centroids
    von_mises: np.ndarray  # (ne,) Pa

    @property
    def sxx(self):
        return self.stress[:, 0]

    @property
    def syy(self):
        return self.stress[:, 1]

    @property
    def sxy(self):
        return self.stress[:, 2]

    @property
    def szz(self):
        return self.stress[:, 3]

    def nodal_von_mises(self, mesh):
        """Area-weighted average of element von Mises stress at each node."""
        area = mesh.signed_areas()
        num = np.zeros(mesh.n_nodes)
        den = np.zeros(mesh.n_nodes)
        for k in range(3):
            np.add.at(num, mesh.elements[:, k], area * self.von_mises)
            np.add.at(den, mesh.elements[:, k], area)
        return num / den


def recover_stress_field(mesh, materials, solution):
    """Constant element stresses from a displacement solution.

    ``solution`` may be an IndentationSolution or a raw (n, 2) / (2n,) array.
    """
    u = getattr(solution, "displacement", solution)
    u = np.asarray(u, dtype=float)
    if u.size != 2 * mesh.n_nodes:
        raise ValueError(f"displacement has {u.size} entries, mesh needs {2 * mesh.n_nodes}")
    E, nu = element_properties(mesh, materials)
    sig = kernels.cst_stress(mesh.nodes, mesh.elements, E, nu, u.reshape(-1, 2)) * PA_PER_MPA
    vm = von_mises(sig[:, 0], sig[:, 1], sig[:, 2], sig[:, 3])
    sig.setflags(write=False)
    vm.setflags(write=False)
    return StressField(sig, vm)

"""Tissue material table for the layered fingertip model."""

from dataclasses import dataclass, field

LAYERS = ("epidermis", "dermis", "subcutaneous", "bone", "nail")

# Young's modulus [Pa] and Poisson ratio per layer
DEFAULT_PROPERTIES = {
    "epidermis": (0.136e6, 0.48),
    "dermis": (0.080e6, 0.48),
    "subcutaneous": (0.034e6, 0.48),
    "bone": (17000e6, 0.30),
    "nail": (170e6, 0.30),
}


@dataclass(frozen=True)
class Material:
    name: str
    elastic_modulus: float  # Pa
    poisson_ratio: float

    def __post_init__(self):
        if self.name not in LAYERS:
            raise ValueError(f"unknown layer name {self.name!r}")
        if not self.elastic_modulus > 0:
            raise ValueError(f"{self.name}: elastic modulus must be positive")
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ValueError(f"{self.name}: Poisson ratio must lie in [0, 0.5)")


@dataclass(frozen=True)
class MaterialTable:
    """Materials indexed by integer id (the position in ``entries``).

    Mesh elements carry the id, so the default ordering matches ``LAYERS``.
    """

    entries: tuple = field(
        default_factory=lambda: tuple(Material(n, *DEFAULT_PROPERTIES[n]) for n in LAYERS)
    )

    def __post_init__(self):
        names = [m.name for m in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate layer in material table")

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, material_id):
        if not 0 <= material_id < len(self.entries):
            raise KeyError(f"unknown material id {material_id}")
        return self.entries[material_id]

    def id_of(self, name):
        for i, m in enumerate(self.entries):
            if m.name == name:
                return i
        raise KeyError(name)

    def scaled(self, factor):
        """Copy with every modulus multiplied by ``factor``."""
        return MaterialTable(
            tuple(Material(m.name, m.elastic_modulus * factor, m.poisson_ratio) for m in self.entries)
        )

    @classmethod
    def homogeneous(cls, elastic_modulus, poisson_ratio):
        """Every layer assigned the same properties."""
        return cls(tuple(Material(n, elastic_modulus, poisson_ratio) for n in LAYERS))

    @classmethod
    def from_dict(cls, data):
        base = dict(DEFAULT_PROPERTIES)
        for name, props in data.items():
            if name not in LAYERS:
                raise ValueError(f"unknown layer name {name!r}")
            unknown = set(props) - {"elastic_modulus", "poisson_ratio"}
            if unknown:
                raise ValueError(f"unknown material keys {sorted(unknown)}")
            E, nu = base[name]
            base[name] = (props.get("elastic_modulus", E), props.get("poisson_ratio", nu))
        return cls(tuple(Material(n, *base[n]) for n in LAYERS))

    def to_dict(self):
        return {
            m.name: {"elastic_modulus": m.elastic_modulus, "poisson_ratio": m.poisson_ratio}
            for m in self.entries
        }

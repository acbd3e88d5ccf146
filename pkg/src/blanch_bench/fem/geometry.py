"""Geometry of the fingertip slab and the rigid indenter (lengths in mm)."""

from dataclasses import asdict, dataclass

import numpy as np

PROTOCOL_WIDTHS = (2.0, 3.0, 4.0, 5.0)
PROTOCOL_DEPTHS = (1.0, 2.0)


@dataclass(frozen=True)
class FingerSectionGeometry:
    """Layered plane-strain cross-section of the finger pad.

    Depth is measured downward from the nominal surface, which passes
    through the ridge crests. The bottom of the subcutaneous layer rests
    on bone and is held fixed.
    """

    domain_width: float = 20.0
    epidermis: float = 0.7
    dermis: float = 1.2
    subcutaneous: float = 4.0
    ridge_pitch: float = 0.35
    ridge_amplitude: float = 0.1
    ridges_enabled: bool = True
    fine_depth: float = 0.5

    def __post_init__(self):
        for name in ("domain_width", "epidermis", "dermis", "subcutaneous", "fine_depth"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.ridges_enabled:
            if not self.ridge_pitch > 0 or not self.ridge_amplitude > 0:
                raise ValueError("ridge pitch and amplitude must be positive")
            if self.ridge_amplitude >= self.epidermis:
                raise ValueError("ridge amplitude must be smaller than the epidermis")

    @property
    def layer_thicknesses(self):
        return (self.epidermis, self.dermis, self.subcutaneous)

    @property
    def total_depth(self):
        return self.epidermis + self.dermis + self.subcutaneous

    @property
    def interfaces(self):
        """Depths of the epidermis/dermis and dermis/subcutaneous boundaries."""
        return (self.epidermis, self.epidermis + self.dermis)

    def surface_y(self, x):
        """Undeformed surface height; crests at y = 0, valleys at y = -amplitude."""
        x = np.asarray(x, dtype=float)
        if not self.ridges_enabled:
            return np.zeros_like(x)
        return -0.5 * self.ridge_amplitude * (1.0 - np.cos(2.0 * np.pi * x / self.ridge_pitch))

    def check_indenter(self, width):
        if self.domain_width < 4.0 * width:
            raise ValueError(
                f"domain width {self.domain_width} mm is less than 4x indenter width {width} mm"
            )

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class IndenterSpec:
    """Rigid flat punch of width ``width_d`` with filleted corners.

    The punch starts touching the ridge crests and descends by
    ``indent_depth_h``.
    """

    width_d: float = 3.0
    indent_depth_h: float = 1.0
    friction_mu: float = 0.4
    corner_fillet: float = 0.1

    def __post_init__(self):
        if not self.width_d > 0:
            raise ValueError("indenter width must be positive")
        if self.indent_depth_h < 0:
            raise ValueError("indent depth must be nonnegative")
        if self.friction_mu < 0:
            raise ValueError("friction coefficient must be nonnegative")
        if not 0 < self.corner_fillet <= 0.5 * self.width_d:
            raise ValueError("corner fillet must be positive and at most half the width")

    @property
    def label(self):
        return f"d{self.width_d:g}_h{self.indent_depth_h:g}"

    def to_dict(self):
        return asdict(self)


def protocol_conditions():
    """The eight (width, height) conditions in protocol order.

    Descending width with the 2 mm height first, as the measurements were run.
    """
    return [(d, h) for d in sorted(PROTOCOL_WIDTHS, reverse=True) for h in sorted(PROTOCOL_DEPTHS, reverse=True)]

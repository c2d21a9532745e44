"""Migdal-Kadanoff renormalization of the Ising model on the diamond hierarchical lattice."""

from .core_maps import (
    AffinePoint,
    BlowupPoint,
    CylinderPoint,
    Jacobian2,
    blowup_image,
    jacobian_phys,
    map_f,
    map_mig,
    map_phys,
    map_Q,
    psi,
)

__version__ = "0.1.0"

__all__ = [
    "AffinePoint",
    "BlowupPoint",
    "CylinderPoint",
    "Jacobian2",
    "blowup_image",
    "jacobian_phys",
    "map_f",
    "map_mig",
    "map_phys",
    "map_Q",
    "psi",
]

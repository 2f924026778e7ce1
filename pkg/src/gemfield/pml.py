"""Graded split-field (Berenger) PML conductivity profiles.

Loss pairing follows the split-field TE system: E_yx and the H_z update carry
the profile graded along x, E_yz and the H_x update carry the profile graded
along z. Behind the layer the grid is terminated by the zero-neighbour rule of
the steppers.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .grid import MaterialGrid


@dataclass(frozen=True)
class PmlSpec:
    thickness: int = 10
    grading_order: float = 3.0
    target_reflection: float = 1e-6

    def __post_init__(self):
        if int(self.thickness) != self.thickness or self.thickness < 1:
            raise ValueError(f"PML thickness must be an integer >= 1, got {self.thickness}")
        if not self.grading_order >= 0:
            raise ValueError("PML grading order must be >= 0")
        if not 0 < self.target_reflection < 1:
            raise ValueError("PML target reflection must lie in (0, 1)")


@dataclass(frozen=True)
class PmlProfile:
    """1D conductivity profiles at the staggered sample positions.

    ``sigma_x`` (S/m) lives at E_y x-positions (i+1/2) and ``sigma_m_x`` (ohm/m)
    at H_z x-positions (i); ``sigma_z`` at E_y z-positions (k+1/2) and
    ``sigma_m_z`` at H_x z-positions (k).
    """

    sigma_x: np.ndarray
    sigma_m_x: np.ndarray
    sigma_z: np.ndarray
    sigma_m_z: np.ndarray
    sigma_max_x: float
    sigma_max_z: float


def sigma_max(spec: PmlSpec, delta: float, eps: float, mu: float) -> float:
    """Peak conductivity giving ``target_reflection`` at normal incidence."""
    length = spec.thickness * delta
    c = 1.0 / math.sqrt(eps * mu)
    m = spec.grading_order
    return -(m + 1) * eps * c * math.log(spec.target_reflection) / (2.0 * length)


def _depths(n: int, thickness: int, offset: float) -> np.ndarray:
    """Depth into the layer (in cells) of samples at positions ``j + offset``."""
    pos = np.arange(n) + offset
    left = thickness - pos
    right = pos - (n - thickness)
    return np.clip(np.maximum(left, right), 0.0, None)


def _graded(depth_cells: np.ndarray, thickness: int, peak: float, order: float) -> np.ndarray:
    # explicit zero outside the layer: with order 0, 0**0 would give the peak
    return np.where(depth_cells > 0, peak * (depth_cells / thickness) ** order, 0.0)


def build_profile(spec: PmlSpec, nx: int, nz: int, dx: float, dz: float,
                  eps: float, mu: float) -> PmlProfile:
    """Polynomially graded profiles on all four sides, matched to ``(eps, mu)``."""
    for n, axis in ((nx, "x"), (nz, "z")):
        if 2 * spec.thickness > n:
            raise ValueError(
                f"PML thickness {spec.thickness} exceeds half the grid along {axis} ({n} cells)")
    m = spec.grading_order
    smax_x = sigma_max(spec, dx, eps, mu)
    smax_z = sigma_max(spec, dz, eps, mu)
    sx = _graded(_depths(nx, spec.thickness, 0.5), spec.thickness, smax_x, m)
    sz = _graded(_depths(nz, spec.thickness, 0.5), spec.thickness, smax_z, m)
    ratio = mu / eps
    smx = _graded(_depths(nx, spec.thickness, 0.0), spec.thickness, smax_x, m) * ratio
    smz = _graded(_depths(nz, spec.thickness, 0.0), spec.thickness, smax_z, m) * ratio
    arrays = [sx, smx, sz, smz]
    for a in arrays:
        a.flags.writeable = False
    return PmlProfile(*arrays, sigma_max_x=smax_x, sigma_max_z=smax_z)


def apply_profile(materials: MaterialGrid, profile: PmlProfile) -> MaterialGrid:
    """Add the profile to the split conductivities of ``materials``.

    The material conductivity is kept on both axes, so a lossy cell inside the
    layer carries ``sigma + profile`` per axis.
    """
    nz, nx = materials.shape
    if (profile.sigma_x.shape != (nx,) or profile.sigma_z.shape != (nz,)
            or profile.sigma_m_x.shape != (nx,) or profile.sigma_m_z.shape != (nz,)):
        raise ValueError("PML profile does not match the material grid")
    return dataclasses.replace(
        materials,
        sigma_x=materials.sigma + profile.sigma_x[None, :],
        sigma_z=materials.sigma + profile.sigma_z[:, None],
        sigma_m_x=materials.sigma_m_hz + profile.sigma_m_x[None, :],
        sigma_m_z=materials.sigma_m_hx + profile.sigma_m_z[:, None],
        has_pml=True,
    )

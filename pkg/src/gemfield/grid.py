"""Yee-grid data model: scenario description, material rasterization and
update-coefficient precomputation shared by both backends.

Arrays are stored with shape ``(nz, nx)`` and indexed ``[k, i]``. Sample
positions (in units of the cell size):

=======  ==============  ==============
field    x               z
=======  ==============  ==============
E_y      i + 1/2         k + 1/2
H_x      i + 1/2         k
H_z      i               k + 1/2
=======  ==============  ==============
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields
from typing import Literal, Mapping

import numpy as np

from .constants import C0, EPS0, MU0
from .errors import ScenarioSemanticError
from .pml import PmlSpec
from .sources import SourceSpec

SHAPE_KINDS: tuple[str, ...] = ("rectangle", "cylinder", "triangle", "wall")
SHAPE_PARAMS: dict[str, tuple[str, ...]] = {
    "rectangle": ("x0", "z0", "x1", "z1"),
    "cylinder": ("xc", "zc", "radius"),
    "triangle": ("x1", "z1", "x2", "z2", "x3", "z3"),
    "wall": ("position", "thickness"),
}
WALL_OPTIONAL = ("start", "end")


@dataclass(frozen=True)
class Material:
    """Relative permittivity/permeability, conductivities and mass density."""

    eps_r: float = 1.0
    sigma: float = 0.0
    mu_r: float = 1.0
    sigma_m: float = 0.0
    density: float = 0.0
    allow_low_eps: bool = False

    def __post_init__(self):
        vals = (self.eps_r, self.sigma, self.mu_r, self.sigma_m, self.density)
        if not all(math.isfinite(v) for v in vals):
            raise ScenarioSemanticError(f"non-finite material parameter in {self}")
        if self.eps_r < 1 and not self.allow_low_eps:
            raise ScenarioSemanticError(f"eps_r = {self.eps_r} < 1 (set allow_low_eps to permit)")
        if self.eps_r <= 0:
            raise ScenarioSemanticError("eps_r must be positive")
        if self.sigma < 0 or self.sigma_m < 0:
            raise ScenarioSemanticError("conductivities must be >= 0")
        if self.mu_r <= 0:
            raise ScenarioSemanticError("mu_r must be positive")
        if self.density < 0:
            raise ScenarioSemanticError("density must be >= 0")


VACUUM = Material()


@dataclass(frozen=True)
class ShapeSpec:
    """A material object. Geometry parameters are in metres.

    rectangle: ``x0 <= x < x1``, ``z0 <= z < z1``.
    cylinder: disc ``(x-xc)^2 + (z-zc)^2 <= radius^2``.
    triangle: closed triangle with vertices ``(x1,z1), (x2,z2), (x3,z3)``.
    wall: slab ``position <= coord < position + thickness`` normal to ``axis``,
    spanning ``start <= other < end`` (whole grid by default).
    """

    kind: Literal["rectangle", "cylinder", "triangle", "wall"]
    params: Mapping[str, float]
    material: Material = VACUUM
    axis: Literal["x", "z"] = "x"

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ScenarioSemanticError(f"unknown shape kind {self.kind!r}")
        need = SHAPE_PARAMS[self.kind]
        allowed = set(need) | (set(WALL_OPTIONAL) if self.kind == "wall" else set())
        missing = [p for p in need if p not in self.params]
        extra = [p for p in self.params if p not in allowed]
        if missing:
            raise ScenarioSemanticError(f"{self.kind} is missing parameter(s) {missing}")
        if extra:
            raise ScenarioSemanticError(f"{self.kind} does not take parameter(s) {extra}")
        if not all(math.isfinite(float(v)) for v in self.params.values()):
            raise ScenarioSemanticError(f"non-finite geometry in {self.kind}")
        if self.axis not in ("x", "z"):
            raise ScenarioSemanticError(f"wall axis must be 'x' or 'z', got {self.axis!r}")
        object.__setattr__(self, "params", {k: float(v) for k, v in self.params.items()})

    def area(self) -> float:
        p = self.params
        if self.kind == "rectangle":
            return max(p["x1"] - p["x0"], 0.0) * max(p["z1"] - p["z0"], 0.0)
        if self.kind == "cylinder":
            return math.pi * max(p["radius"], 0.0) ** 2
        if self.kind == "triangle":
            return 0.5 * abs((p["x2"] - p["x1"]) * (p["z3"] - p["z1"])
                             - (p["x3"] - p["x1"]) * (p["z2"] - p["z1"]))
        span = p.get("end", math.inf) - p.get("start", -math.inf)
        return max(p["thickness"], 0.0) * max(span, 0.0)

    def contains(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Boolean membership of points ``(x, z)``."""
        p = self.params
        if self.kind == "rectangle":
            return (x >= p["x0"]) & (x < p["x1"]) & (z >= p["z0"]) & (z < p["z1"])
        if self.kind == "cylinder":
            return (x - p["xc"]) ** 2 + (z - p["zc"]) ** 2 <= p["radius"] ** 2
        if self.kind == "triangle":
            ax, az, bx, bz, cx, cz = (p[n] for n in SHAPE_PARAMS["triangle"])
            d1 = (x - bx) * (az - bz) - (ax - bx) * (z - bz)
            d2 = (x - cx) * (bz - cz) - (bx - cx) * (z - cz)
            d3 = (x - ax) * (cz - az) - (cx - ax) * (z - az)
            has_neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
            has_pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
            return ~(has_neg & has_pos)
        normal, other = (x, z) if self.axis == "x" else (z, x)
        lo = p["position"]
        inside = (normal >= lo) & (normal < lo + p["thickness"])
        return inside & (other >= p.get("start", -math.inf)) & (other < p.get("end", math.inf))


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative description of one simulation."""

    nx: int
    nz: int
    dx: float = 1e-3
    dz: float = 1e-3
    courant_factor: float = 0.95
    n_steps: int = 1000
    background: Material = VACUUM
    objects: tuple[ShapeSpec, ...] = ()
    sources: tuple[SourceSpec, ...] = ()
    probes: tuple[tuple[int, int], ...] = ()
    pml: PmlSpec | None = None
    seed: int = 0
    snapshot_every: int = 0
    columns: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "probes", tuple((int(i), int(k)) for i, k in self.probes))
        object.__setattr__(self, "columns", tuple(int(c) for c in self.columns))
        if self.nx < 2 or self.nz < 2:
            raise ScenarioSemanticError(f"grid must be at least 2x2, got {self.nx}x{self.nz}")
        if not (self.dx > 0 and self.dz > 0):
            raise ScenarioSemanticError("dx and dz must be positive")
        if not 0 < self.courant_factor <= 1:
            raise ScenarioSemanticError(
                f"courant_factor must lie in (0, 1], got {self.courant_factor}")
        if self.n_steps < 1:
            raise ScenarioSemanticError("n_steps must be >= 1")
        if self.snapshot_every < 0:
            raise ScenarioSemanticError("snapshot_every must be >= 0")
        for j, (i, k) in enumerate(self.probes):
            if not (0 <= i < self.nx and 0 <= k < self.nz):
                raise ScenarioSemanticError(
                    f"probe {j} at ({i}, {k}) lies outside the {self.nx}x{self.nz} grid")
        for j, src in enumerate(self.sources):
            if not src.inside(self.nx, self.nz):
                raise ScenarioSemanticError(f"source {j} lies outside the grid")
        for c in self.columns:
            if not 0 <= c < self.nx:
                raise ScenarioSemanticError(f"column monitor {c} lies outside the grid")
        if self.pml is not None:
            t = self.pml.thickness
            if 2 * t > self.nx or 2 * t > self.nz:
                raise ScenarioSemanticError(
                    f"PML thickness {t} exceeds half the {self.nx}x{self.nz} grid")


@dataclass(frozen=True)
class MaterialGrid:
    """Material parameters at the staggered sample points.

    ``sigma_x``/``sigma_z`` are the split electric conductivities at E_y
    points. ``sigma_m_z`` is the magnetic loss applied to H_x (graded along z
    inside a PML) and ``sigma_m_x`` the loss applied to H_z (graded along x).
    Without a PML both split values equal the material values.
    """

    nx: int
    nz: int
    dx: float
    dz: float
    eps: np.ndarray
    sigma: np.ndarray
    density: np.ndarray
    mu_hx: np.ndarray
    sigma_m_hx: np.ndarray
    mu_hz: np.ndarray
    sigma_m_hz: np.ndarray
    sigma_x: np.ndarray
    sigma_z: np.ndarray
    sigma_m_x: np.ndarray
    sigma_m_z: np.ndarray
    has_pml: bool = False

    def __post_init__(self):
        for f in fields(self):
            a = getattr(self, f.name)
            if isinstance(a, np.ndarray):
                if a.shape != (self.nz, self.nx):
                    raise ValueError(f"{f.name} has shape {a.shape}, expected {(self.nz, self.nx)}")
                a.flags.writeable = False

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nz, self.nx)


def sample_points(nx: int, nz: int, dx: float, dz: float):
    """Physical coordinates ``(x, z)`` of the E_y, H_x and H_z samples."""
    i = np.arange(nx)
    k = np.arange(nz)
    xe, ze = np.meshgrid((i + 0.5) * dx, (k + 0.5) * dz)
    xhx, zhx = np.meshgrid((i + 0.5) * dx, k * dz)
    xhz, zhz = np.meshgrid(i * dx, (k + 0.5) * dz)
    return {"ey": (xe, ze), "hx": (xhx, zhx), "hz": (xhz, zhz)}


def rasterize(scenario: ScenarioSpec) -> MaterialGrid:
    """Paint the background, then each object in listed order.

    A staggered sample takes an object's material iff its physical coordinate
    is inside the object; no interface averaging.
    """
    nx, nz = scenario.nx, scenario.nz
    pts = sample_points(nx, nz, scenario.dx, scenario.dz)
    bg = scenario.background
    eps = np.full((nz, nx), bg.eps_r * EPS0)
    sigma = np.full((nz, nx), bg.sigma)
    density = np.full((nz, nx), bg.density)
    mu_hx = np.full((nz, nx), bg.mu_r * MU0)
    sm_hx = np.full((nz, nx), bg.sigma_m)
    mu_hz = np.full((nz, nx), bg.mu_r * MU0)
    sm_hz = np.full((nz, nx), bg.sigma_m)
    for n, shape in enumerate(scenario.objects):
        if shape.area() <= 0:
            warnings.warn(f"object {n} ({shape.kind}) has zero area and is skipped", stacklevel=2)
            continue
        m = shape.material
        inside = shape.contains(*pts["ey"])
        eps[inside] = m.eps_r * EPS0
        sigma[inside] = m.sigma
        density[inside] = m.density
        inside = shape.contains(*pts["hx"])
        mu_hx[inside] = m.mu_r * MU0
        sm_hx[inside] = m.sigma_m
        inside = shape.contains(*pts["hz"])
        mu_hz[inside] = m.mu_r * MU0
        sm_hz[inside] = m.sigma_m
    return MaterialGrid(
        nx=nx, nz=nz, dx=scenario.dx, dz=scenario.dz,
        eps=eps, sigma=sigma, density=density,
        mu_hx=mu_hx, sigma_m_hx=sm_hx, mu_hz=mu_hz, sigma_m_hz=sm_hz,
        sigma_x=sigma.copy(), sigma_z=sigma.copy(),
        sigma_m_x=sm_hz.copy(), sigma_m_z=sm_hx.copy(),
    )


def max_phase_velocity(materials: MaterialGrid) -> float:
    """Upper bound of 1/sqrt(eps*mu) over the grid (min eps times min mu)."""
    mu_min = min(materials.mu_hx.min(), materials.mu_hz.min())
    return 1.0 / math.sqrt(materials.eps.min() * mu_min)


def courant_time_step(dx: float, dz: float, c_max: float = C0,
                      courant_factor: float = 1.0, *, allow_unstable: bool = False) -> float:
    """Time step ``S / (c_max * sqrt(1/dx^2 + 1/dz^2))`` for Courant number ``S``.

    ``allow_unstable`` lets ``S > 1`` through; used to exercise the divergence
    detector.
    """
    if not (dx > 0 and dz > 0 and c_max > 0 and courant_factor > 0):
        raise ValueError("courant_time_step needs positive dx, dz, c_max and courant_factor")
    if courant_factor > 1 and not allow_unstable:
        raise ValueError(f"courant_factor {courant_factor} exceeds the stability limit 1")
    return courant_factor / (c_max * math.sqrt(1.0 / dx**2 + 1.0 / dz**2))


@dataclass(frozen=True)
class CoefficientGrid:
    """Precomputed update coefficients, shape ``(nz, nx)`` each.

    E_y: ``ca`` (self factor), ``cb`` (gain) and the per-difference gains
    ``cbx = cb/dx``, ``cbz = cb/dz``. H_x: ``dax`` (self factor, 1 without
    magnetic loss) and ``dbx`` (gain including 1/dz). H_z: ``daz``, ``dbz``
    (including 1/dx). Split-field analogues carry a trailing ``_s``:
    ``ca_x, cb_x, cbx_s`` for E_yx, ``ca_z, cb_z, cbz_s`` for E_yz and
    ``dax_s, dbx_s, daz_s, dbz_s`` for the PML magnetic updates.
    """

    nx: int
    nz: int
    dt: float
    dx: float
    dz: float
    ca: np.ndarray
    cb: np.ndarray
    cbx: np.ndarray
    cbz: np.ndarray
    dax: np.ndarray
    dbx: np.ndarray
    daz: np.ndarray
    dbz: np.ndarray
    ca_x: np.ndarray
    cb_x: np.ndarray
    cbx_s: np.ndarray
    ca_z: np.ndarray
    cb_z: np.ndarray
    cbz_s: np.ndarray
    dax_s: np.ndarray
    dbx_s: np.ndarray
    daz_s: np.ndarray
    dbz_s: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            a = getattr(self, f.name)
            if isinstance(a, np.ndarray):
                a.flags.writeable = False

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nz, self.nx)

    @property
    def dtype(self):
        return self.ca.dtype


def electric_coefficients(sigma, eps, dt):
    """``(A-/A+, dt/(A+ eps))`` with ``A-/+ = 1 -/+ sigma dt / (2 eps)``."""
    r = sigma * dt / (2.0 * eps)
    return (1.0 - r) / (1.0 + r), (dt / eps) / (1.0 + r)


def magnetic_coefficients(sigma_m, mu, dt, delta):
    """Magnetic self factor and difference gain (the latter divided by ``delta``)."""
    r = sigma_m * dt / (2.0 * mu)
    return (1.0 - r) / (1.0 + r), (dt / mu) / (1.0 + r) / delta


def compute_coefficients(materials: MaterialGrid, dt: float, dtype=np.float64) -> CoefficientGrid:
    if not dt > 0:
        raise ValueError("dt must be positive")
    m = materials
    ca, cb = electric_coefficients(m.sigma, m.eps, dt)
    ca_x, cb_x = electric_coefficients(m.sigma_x, m.eps, dt)
    ca_z, cb_z = electric_coefficients(m.sigma_z, m.eps, dt)
    dax, dbx = magnetic_coefficients(m.sigma_m_hx, m.mu_hx, dt, m.dz)
    daz, dbz = magnetic_coefficients(m.sigma_m_hz, m.mu_hz, dt, m.dx)
    dax_s, dbx_s = magnetic_coefficients(m.sigma_m_z, m.mu_hx, dt, m.dz)
    daz_s, dbz_s = magnetic_coefficients(m.sigma_m_x, m.mu_hz, dt, m.dx)
    arrays = dict(
        ca=ca, cb=cb, cbx=cb / m.dx, cbz=cb / m.dz, dax=dax, dbx=dbx, daz=daz, dbz=dbz,
        ca_x=ca_x, cb_x=cb_x, cbx_s=cb_x / m.dx, ca_z=ca_z, cb_z=cb_z, cbz_s=cb_z / m.dz,
        dax_s=dax_s, dbx_s=dbx_s, daz_s=daz_s, dbz_s=dbz_s,
    )
    arrays = {k: np.ascontiguousarray(v, dtype=dtype) for k, v in arrays.items()}
    for k, v in arrays.items():
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite update coefficient {k}")
    return CoefficientGrid(nx=m.nx, nz=m.nz, dt=dt, dx=m.dx, dz=m.dz, **arrays)

"""Bundled application scenarios: layered tissue and a photonic waveguide cavity.

Tissue properties at the operating frequency come from the four-term
Cole-Cole fits of Gabriel, Lau and Gabriel (Phys. Med. Biol. 41, 1996) and
mass densities from the IT'IS Foundation tissue database (v4.1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .constants import C0, EPS0
from .grid import Material, ScenarioSpec, ShapeSpec, courant_time_step
from .pml import PmlSpec
from .scenario_io import parse_scenario
from .sources import SourceSpec, gaussian_spread_for_bandwidth


@dataclass(frozen=True)
class ColeCole:
    """``eps_inf + sum_n d_n / (1 + (j w tau_n)^(1 - alpha_n)) + sigma_i / (j w eps0)``."""

    eps_inf: float
    delta: tuple[float, float, float, float]
    tau: tuple[float, float, float, float]
    alpha: tuple[float, float, float, float]
    sigma_ionic: float

    def permittivity(self, f: float) -> complex:
        w = 2 * math.pi * f
        eps = complex(self.eps_inf)
        for d, t, a in zip(self.delta, self.tau, self.alpha):
            eps += d / (1 + (1j * w * t) ** (1 - a))
        return eps + self.sigma_ionic / (1j * w * EPS0)

    def material(self, f: float, density: float) -> Material:
        """Relative permittivity and effective conductivity at ``f``."""
        eps = self.permittivity(f)
        return Material(eps_r=eps.real, sigma=-eps.imag * 2 * math.pi * f * EPS0, density=density)


PS, NS, US, MS = 1e-12, 1e-9, 1e-6, 1e-3
TISSUES = {
    "skin": ColeCole(4.0, (32.0, 1100.0, 0.0, 0.0), (7.234 * PS, 32.481 * NS, 159.155 * US, 15.915 * MS),
                     (0.0, 0.20, 0.20, 0.20), 0.0002),
    "fat": ColeCole(2.5, (3.0, 15.0, 3.3e4, 1e7), (7.958 * PS, 15.915 * NS, 159.155 * US, 7.958 * MS),
                    (0.2, 0.1, 0.05, 0.01), 0.01),
    "muscle": ColeCole(4.0, (50.0, 7000.0, 1.2e6, 2.5e7), (7.234 * PS, 353.678 * NS, 318.310 * US, 2.274 * MS),
                       (0.1, 0.1, 0.1, 0.0), 0.2),
}
DENSITIES = {"skin": 1109.0, "fat": 911.0, "muscle": 1090.0}  # kg/m^3

TISSUE_FREQUENCY = 6.8e9
SKIN_THICKNESS = 2e-3
FAT_THICKNESS = 33e-3
SOURCE_STANDOFF = 10e-3
CELLS_PER_WAVELENGTH = 20


@dataclass(frozen=True)
class TissueLayout:
    """Cell-row boundaries of the layered tissue scenario."""

    source_k: int
    skin: tuple[int, int]
    fat: tuple[int, int]
    muscle: tuple[int, int]
    column: int


def tissue_materials(f: float = TISSUE_FREQUENCY) -> dict[str, Material]:
    return {name: TISSUES[name].material(f, DENSITIES[name]) for name in TISSUES}


def tissue_scenario(f: float = TISSUE_FREQUENCY) -> ScenarioSpec:
    """Point source in air above skin, fat and muscle layers stacked along z."""
    mats = tissue_materials(f)
    eps_max = max(m.eps_r for m in mats.values())
    dx = C0 / (f * math.sqrt(eps_max)) / CELLS_PER_WAVELENGTH
    pml = PmlSpec()
    nx = 161
    src_k = pml.thickness + 12
    z_skin = src_k * dx + SOURCE_STANDOFF
    z_fat = z_skin + SKIN_THICKNESS
    z_muscle = z_fat + FAT_THICKNESS
    nz = math.ceil(z_muscle / dx) + 40
    layers = (
        ShapeSpec("wall", dict(position=z_skin, thickness=SKIN_THICKNESS), mats["skin"], "z"),
        ShapeSpec("wall", dict(position=z_fat, thickness=FAT_THICKNESS), mats["fat"], "z"),
        ShapeSpec("wall", dict(position=z_muscle, thickness=nz * dx - z_muscle), mats["muscle"], "z"),
    )
    spread = gaussian_spread_for_bandwidth(f)
    src = SourceSpec("gaussian", nx // 2, src_k, spread=spread)
    # pulse tail plus a round trip from the source to the muscle boundary
    c = nx // 2
    trip = (SOURCE_STANDOFF + SKIN_THICKNESS * math.sqrt(mats["skin"].eps_r)
            + FAT_THICKNESS * math.sqrt(mats["fat"].eps_r)) / C0
    dt = courant_time_step(dx, dx, C0, 0.95)
    steps = math.ceil((src.center + 4 * spread + 2 * trip) / dt)
    k_skin = math.ceil(z_skin / dx - 0.5)
    probes = ((c, src_k + 5), (c, k_skin + 2), (c, k_skin + 40), (c, math.ceil(z_muscle / dx) + 5))
    return ScenarioSpec(nx=nx, nz=nz, dx=dx, dz=dx, courant_factor=0.95, n_steps=steps,
                        objects=layers, sources=(src,), probes=probes, pml=pml, columns=(c,))


def tissue_layout(scenario: ScenarioSpec) -> TissueLayout:
    """Row ranges ``[k0, k1)`` of each tissue along the monitored column."""
    col = scenario.columns[0]
    z = (np.arange(scenario.nz) + 0.5) * scenario.dz
    rows = {}
    for name, shape in zip(("skin", "fat", "muscle"), scenario.objects):
        ks = np.flatnonzero(shape.contains(np.full_like(z, (col + 0.5) * scenario.dx), z))
        rows[name] = (int(ks[0]), int(ks[-1]) + 1)
    return TissueLayout(scenario.sources[0].k, rows["skin"], rows["fat"], rows["muscle"], col)


WAVEGUIDE_EPS = 12.0
WAVEGUIDE_WIDTH = 1.2e-6
HOLE_RADIUS = 0.36e-6
HOLE_PERIOD = 1.0e-6
DEFECT_SPACING = 1.4e-6
HOLES_PER_SIDE = 3
WAVEGUIDE_FREQUENCY = 75e12


def waveguide_scenario(dx: float = 0.05e-6, n_steps: int = 4000) -> ScenarioSpec:
    """Dielectric strip with a row of air holes around a central defect cavity."""
    pml = PmlSpec()
    nx, nz = 260, 120
    xc, zc = nx / 2 * dx, nz / 2 * dx
    core = Material(eps_r=WAVEGUIDE_EPS)
    objects = [ShapeSpec("wall", dict(position=zc - WAVEGUIDE_WIDTH / 2, thickness=WAVEGUIDE_WIDTH),
                         core, "z")]
    for side in (-1, 1):
        for j in range(HOLES_PER_SIDE):
            x = xc + side * (DEFECT_SPACING / 2 + j * HOLE_PERIOD)
            objects.append(ShapeSpec("cylinder", dict(xc=x, zc=zc, radius=HOLE_RADIUS), Material()))
    half = round(WAVEGUIDE_WIDTH / 2 / dx)
    kc = nz // 2
    src = SourceSpec("modulated_gaussian", pml.thickness + 10, geometry="line", k0=kc - half,
                     k1=kc + half, f0=WAVEGUIDE_FREQUENCY,
                     spread=gaussian_spread_for_bandwidth(0.3 * WAVEGUIDE_FREQUENCY))
    probes = ((nx - pml.thickness - 10, kc), (nx // 2, kc))
    return ScenarioSpec(nx=nx, nz=nz, dx=dx, dz=dx, courant_factor=0.95, n_steps=n_steps,
                        objects=tuple(objects), sources=(src,), probes=probes, pml=pml)


BUNDLED = {"tissue": tissue_scenario, "waveguide": waveguide_scenario}


def bundled_path(name: str):
    """Path-like handle to a scenario file shipped with the package."""
    if name not in BUNDLED:
        raise ValueError(f"unknown bundled scenario {name!r}; have {sorted(BUNDLED)}")
    return resources.files("gemfield") / "data" / f"{name}.scn"


def load_bundled(name: str) -> ScenarioSpec:
    return parse_scenario(bundled_path(name).read_text())

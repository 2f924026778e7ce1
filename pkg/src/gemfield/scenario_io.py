"""Scenario text format, canonical serialization and random scenario generation.

Grammar
-------
One statement per line; ``#`` starts a comment. A statement is a keyword,
optional positional words, then whitespace-separated ``key=value`` pairs::

    grid nx=200 nz=200 dx=0.001 dz=0.001
    run steps=1024 courant=0.95 seed=0 snapshot_every=0
    background eps_r=1 sigma=0 mu_r=1 sigma_m=0 density=0
    pml thickness=10 order=3 reflection=1e-06
    object rectangle x0=0.02 z0=0.02 x1=0.05 z1=0.04 eps_r=4 sigma=0.01
    object cylinder xc=0.1 zc=0.1 radius=0.02 eps_r=12
    object triangle x1=0 z1=0 x2=0.01 z2=0 x3=0 z3=0.01 eps_r=2
    object wall axis=z position=0.05 thickness=0.002 start=0 end=0.1 eps_r=5
    source gaussian point i=100 k=100 amplitude=1 spread=1e-10
    source modulated_gaussian line i=5 k0=10 k1=30 f0=7.5e13 spread=1e-14
    probe i=120 k=80
    column i=100

``grid`` is required; ``run``, ``background`` and ``pml`` may appear at most
once. Geometry is in metres, source and probe positions in cell indices.
Material keys (objects and background): ``eps_r sigma mu_r sigma_m density
allow_low_eps``. Source keys: ``amplitude f0 spread t0 start_step`` plus ``i k``
(point) or ``i k0 k1`` (line). Defaults: ``dx = dz = 1e-3``, ``steps = 1000``,
``courant = 0.95``, ``seed = 0``, ``snapshot_every = 0``, vacuum background,
no PML (``pml`` with no keys gives thickness 10, order 3, reflection 1e-6),
``amplitude = 1``, ``start_step = 0``, ``t0 = 4 spread``.
"""

from __future__ import annotations

import hashlib
import math
import re

import numpy as np

from .constants import C0
from .errors import ScenarioError, ScenarioSemanticError, ScenarioSyntaxError
from .grid import SHAPE_KINDS, SHAPE_PARAMS, WALL_OPTIONAL, Material, ScenarioSpec, ShapeSpec
from .pml import PmlSpec
from .sources import SOURCE_KINDS, SourceSpec

_MATERIAL_KEYS = ("eps_r", "sigma", "mu_r", "sigma_m", "density", "allow_low_eps")
_SOURCE_KEYS = ("amplitude", "f0", "spread", "t0", "start_step")
_INT_KEYS = {"nx", "nz", "steps", "seed", "snapshot_every", "thickness", "i", "k", "k0", "k1",
             "start_step"}
_TOKEN = re.compile(r"\S+")


def _parse_value(key, raw, line, col, int_keys=_INT_KEYS):
    try:
        if key == "allow_low_eps":
            if raw.lower() in ("1", "true", "yes"):
                return True
            if raw.lower() in ("0", "false", "no"):
                return False
            raise ValueError(raw)
        if key == "axis":
            if raw not in ("x", "z"):
                raise ValueError(raw)
            return raw
        if key in int_keys:
            return int(raw)
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError(raw)
        return value
    except ValueError:
        raise ScenarioSyntaxError(f"bad value {raw!r} for {key!r}", line, col) from None


class _Statement:
    def __init__(self, line, words, pairs, cols):
        self.line = line
        self.words = words          # [(word, col)]
        self.pairs = pairs          # {key: value}
        self.cols = cols            # {key: col}

    def take(self, allowed, required=()):
        for key, col in self.cols.items():
            if key not in allowed:
                raise ScenarioSyntaxError(
                    f"unknown key {key!r} for '{self.words[0][0]}'", self.line, col)
        for key in required:
            if key not in self.pairs:
                raise ScenarioSyntaxError(
                    f"'{self.words[0][0]}' requires {key!r}", self.line, self.words[0][1])
        return dict(self.pairs)


def _tokenize(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
        if not toks:
            continue
        words, pairs, cols = [], {}, {}
        for tok, col in toks:
            if "=" in tok:
                key, _, val = tok.partition("=")
                if not key or not val:
                    raise ScenarioSyntaxError(f"malformed pair {tok!r}", lineno, col)
                if key in pairs:
                    raise ScenarioSyntaxError(f"duplicate key {key!r}", lineno, col)
                # object geometry is in metres, so e.g. a wall's thickness is a float
                int_keys = () if words and words[0][0] == "object" else _INT_KEYS
                pairs[key] = _parse_value(key, val, lineno, col + len(key) + 1, int_keys)
                cols[key] = col
            elif pairs:
                raise ScenarioSyntaxError(f"unexpected word {tok!r} after key=value pairs",
                                          lineno, col)
            else:
                words.append((tok, col))
        yield _Statement(lineno, words, pairs, cols)


def _material(pairs):
    kw = {k: pairs.pop(k) for k in _MATERIAL_KEYS if k in pairs}
    return Material(**kw)


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse scenario text strictly; see the module docstring for the grammar."""
    singles = {}
    objects, sources, probes, columns = [], [], [], []
    for st in _tokenize(text):
        kw, kcol = st.words[0] if st.words else (None, 1)
        if kw is None:
            raise ScenarioSyntaxError("statement has no keyword", st.line, 1)
        nwords = {"object": 2, "source": 3}.get(kw, 1)
        if len(st.words) != nwords:
            col = st.words[nwords][1] if len(st.words) > nwords else kcol
            raise ScenarioSyntaxError(
                f"'{kw}' expects {nwords - 1} word(s) before its key=value pairs", st.line, col)
        try:
            if kw in ("grid", "run", "background", "pml"):
                if kw in singles:
                    raise ScenarioSyntaxError(f"duplicate '{kw}' statement", st.line, kcol)
                if kw == "grid":
                    singles[kw] = st.take(("nx", "nz", "dx", "dz"), ("nx", "nz"))
                elif kw == "run":
                    singles[kw] = st.take(("steps", "courant", "seed", "snapshot_every"))
                elif kw == "background":
                    singles[kw] = _material(st.take(_MATERIAL_KEYS))
                else:
                    p = st.take(("thickness", "order", "reflection"))
                    singles[kw] = PmlSpec(
                        thickness=p.get("thickness", 10), grading_order=p.get("order", 3.0),
                        target_reflection=p.get("reflection", 1e-6))
            elif kw == "object":
                kind, col = st.words[1]
                if kind not in SHAPE_KINDS:
                    raise ScenarioSyntaxError(f"unknown object kind {kind!r}", st.line, col)
                geo = SHAPE_PARAMS[kind]
                extra = WALL_OPTIONAL + ("axis",) if kind == "wall" else ()
                p = st.take(geo + extra + _MATERIAL_KEYS, geo)
                axis = p.pop("axis", "x")
                mat = _material(p)
                objects.append(ShapeSpec(kind, p, mat, axis))
            elif kw == "source":
                (kind, col), (geom, gcol) = st.words[1], st.words[2]
                if kind not in SOURCE_KINDS:
                    raise ScenarioSyntaxError(f"unknown source kind {kind!r}", st.line, col)
                if geom == "point":
                    p = st.take(("i", "k") + _SOURCE_KEYS, ("i", "k"))
                elif geom == "line":
                    p = st.take(("i", "k0", "k1") + _SOURCE_KEYS, ("i",))
                else:
                    raise ScenarioSyntaxError(f"unknown source geometry {geom!r}", st.line, gcol)
                if "start_step" in p:
                    p["start"] = p.pop("start_step")
                sources.append(SourceSpec(kind=kind, geometry=geom, **p))
            elif kw == "probe":
                p = st.take(("i", "k"), ("i", "k"))
                probes.append((p["i"], p["k"]))
            elif kw == "column":
                columns.append(st.take(("i",), ("i",))["i"])
            else:
                raise ScenarioSyntaxError(f"unknown statement {kw!r}", st.line, kcol)
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioSemanticError(f"line {st.line}: {exc}") from exc
    if "grid" not in singles:
        raise ScenarioSyntaxError("missing 'grid' statement", 1, 1)
    g = singles["grid"]
    r = singles.get("run", {})
    return ScenarioSpec(
        nx=g["nx"], nz=g["nz"], dx=g.get("dx", 1e-3), dz=g.get("dz", 1e-3),
        courant_factor=r.get("courant", 0.95), n_steps=r.get("steps", 1000),
        background=singles.get("background", Material()), objects=tuple(objects),
        sources=tuple(sources), probes=tuple(probes), pml=singles.get("pml"),
        seed=r.get("seed", 0), snapshot_every=r.get("snapshot_every", 0),
        columns=tuple(columns),
    )


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _material_text(m: Material) -> str:
    text = (f"eps_r={_fmt(m.eps_r)} sigma={_fmt(m.sigma)} mu_r={_fmt(m.mu_r)} "
            f"sigma_m={_fmt(m.sigma_m)} density={_fmt(m.density)}")
    return text + (" allow_low_eps=true" if m.allow_low_eps else "")


def format_scenario(spec: ScenarioSpec) -> str:
    """Canonical text form with every default written out."""
    lines = [
        f"grid nx={spec.nx} nz={spec.nz} dx={_fmt(spec.dx)} dz={_fmt(spec.dz)}",
        f"run steps={spec.n_steps} courant={_fmt(spec.courant_factor)} seed={spec.seed} "
        f"snapshot_every={spec.snapshot_every}",
        f"background {_material_text(spec.background)}",
    ]
    if spec.pml is not None:
        p = spec.pml
        lines.append(f"pml thickness={p.thickness} order={_fmt(p.grading_order)} "
                     f"reflection={_fmt(p.target_reflection)}")
    for obj in spec.objects:
        geo = " ".join(f"{k}={_fmt(obj.params[k])}" for k in SHAPE_PARAMS[obj.kind])
        if obj.kind == "wall":
            geo = f"axis={obj.axis} " + geo
            geo += "".join(f" {k}={_fmt(obj.params[k])}" for k in WALL_OPTIONAL if k in obj.params)
        lines.append(f"object {obj.kind} {geo} {_material_text(obj.material)}")
    for s in spec.sources:
        if s.geometry == "point":
            where = f"i={s.i} k={s.k}"
        else:
            where = f"i={s.i} k0={s.k0}" + (f" k1={s.k1}" if s.k1 is not None else "")
        extra = f" amplitude={_fmt(s.amplitude)}"
        if s.f0:
            extra += f" f0={_fmt(s.f0)}"
        if s.spread:
            extra += f" spread={_fmt(s.spread)}"
        if s.t0 is not None:
            extra += f" t0={_fmt(s.t0)}"
        extra += f" start_step={s.start}"
        lines.append(f"source {s.kind} {s.geometry} {where}{extra}")
    lines += [f"probe i={i} k={k}" for i, k in spec.probes]
    lines += [f"column i={c}" for c in spec.columns]
    return "\n".join(lines) + "\n"


def scenario_hash(spec: ScenarioSpec) -> str:
    """SHA-256 of the canonical text; equal for equivalent scenario files."""
    return hashlib.sha256(format_scenario(spec).encode()).hexdigest()


def load_scenario(path) -> ScenarioSpec:
    with open(path) as fh:
        return parse_scenario(fh.read())


# --- random scenarios -------------------------------------------------------

EPS_R_RANGE = (1.0, 12.0)
SIGMA_RANGE = (0.0, 0.05)
CELLS_PER_WAVELENGTH = 15


def max_resolved_frequency(dx: float, eps_r_max: float = EPS_R_RANGE[1]) -> float:
    """Highest frequency sampled by ``CELLS_PER_WAVELENGTH`` cells in the densest medium."""
    return C0 / (CELLS_PER_WAVELENGTH * math.sqrt(eps_r_max) * dx)


def _random_shape(rng, kind, lo, hi, dx):
    """A shape inside the cell range ``[lo, hi)`` on both axes."""
    span = (hi - lo) * dx
    a, b = lo * dx, hi * dx
    mat = Material(eps_r=float(rng.uniform(*EPS_R_RANGE)), sigma=float(rng.uniform(*SIGMA_RANGE)))
    if kind == "rectangle":
        w, h = rng.uniform(0.05, 0.3, size=2) * span
        x0 = rng.uniform(a, b - w)
        z0 = rng.uniform(a, b - h)
        return ShapeSpec("rectangle", dict(x0=x0, z0=z0, x1=x0 + w, z1=z0 + h), mat)
    if kind == "cylinder":
        r = rng.uniform(0.03, 0.15) * span
        xc, zc = rng.uniform(a + r, b - r, size=2)
        return ShapeSpec("cylinder", dict(xc=xc, zc=zc, radius=r), mat)
    if kind == "triangle":
        size = rng.uniform(0.1, 0.35) * span
        x0, z0 = rng.uniform(a, b - size, size=2)
        while True:
            pts = rng.uniform(0, size, size=6)
            area = 0.5 * abs((pts[2] - pts[0]) * (pts[5] - pts[1])
                             - (pts[4] - pts[0]) * (pts[3] - pts[1]))
            if area > 0.05 * size * size:
                break
        names = SHAPE_PARAMS["triangle"]
        return ShapeSpec("triangle", {n: (x0 if j % 2 == 0 else z0) + pts[j]
                                      for j, n in enumerate(names)}, mat)
    axis = "x" if rng.random() < 0.5 else "z"
    thick = rng.integers(2, 7) * dx
    pos = rng.uniform(a, b - thick)
    length = rng.uniform(0.3, 1.0) * span
    start = rng.uniform(a, b - length)
    return ShapeSpec("wall", dict(position=pos, thickness=thick, start=start, end=start + length),
                     mat, axis)


def generate_random_scenario(seed: int, side_cells: int = 200, *, dx: float = 1e-3,
                             pml_thickness: int | None = 10,
                             courant_factor: float = 0.95) -> ScenarioSpec:
    """Deterministic random scenario: 1-4 objects, one source, >= 3 probes.

    Object, source and probe positions avoid the PML band. The run length lets
    a pulse pass its 8-spread tail and then cross the grid diagonal twice at
    the slowest phase velocity.
    """
    if side_cells < 50:
        raise ValueError(f"side_cells must be >= 50, got {side_cells}")
    rng = np.random.default_rng(seed)
    n = side_cells
    margin = (pml_thickness or 0) + 2
    lo, hi = margin, n - margin
    objects = tuple(_random_shape(rng, SHAPE_KINDS[rng.integers(len(SHAPE_KINDS))], lo, hi, dx)
                    for _ in range(rng.integers(1, 5)))
    f_max = max_resolved_frequency(dx)
    kind = SOURCE_KINDS[rng.integers(len(SOURCE_KINDS))]
    si, sk = (int(v) for v in rng.integers(lo, hi, size=2))
    amplitude = float(rng.uniform(0.5, 2.0))
    if kind == "sinusoid":
        src = SourceSpec(kind, si, sk, amplitude=amplitude, f0=float(rng.uniform(0.2, 0.5) * f_max))
    elif kind == "gaussian":
        src = SourceSpec(kind, si, sk, amplitude=amplitude,
                         spread=float(rng.uniform(1.0, 2.0) * 0.6 / f_max))
    else:
        f0 = float(rng.uniform(0.2, 0.5) * f_max)
        src = SourceSpec(kind, si, sk, amplitude=amplitude, f0=f0,
                         spread=float(rng.uniform(1.5, 3.0) / f0))
    probes = tuple((int(i), int(k)) for i, k in rng.integers(lo, hi, size=(rng.integers(3, 7), 2)))
    dt = courant_factor / (C0 * math.sqrt(2.0)) * dx
    if kind == "sinusoid":
        drive = 10.0 / src.f0
    else:
        drive = src.center + 8.0 * src.spread
    crossing = 2.0 * n * math.sqrt(2.0) * dx * math.sqrt(EPS_R_RANGE[1]) / C0
    n_steps = int(math.ceil((drive + crossing) / dt))
    pml = PmlSpec(thickness=pml_thickness) if pml_thickness else None
    return ScenarioSpec(nx=n, nz=n, dx=dx, dz=dx, courant_factor=courant_factor,
                        n_steps=n_steps, objects=objects, sources=(src,), probes=probes,
                        pml=pml, seed=int(seed))

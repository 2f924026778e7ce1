import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gemfield.constants import C0, EPS0, MU0
from gemfield.errors import ScenarioSemanticError
from gemfield.grid import (Material, ScenarioSpec, ShapeSpec, compute_coefficients,
                           courant_time_step, electric_coefficients, max_phase_velocity,
                           rasterize, sample_points)
from oracles import material_grid


# --- time step ---------------------------------------------------------------

def test_unit_cfl():
    assert courant_time_step(1.0, 1.0, 1.0, 1.0) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_tissue_style_cfl():
    dx = 3.2e-4
    assert courant_time_step(dx, dx, C0, 0.95) == pytest.approx(0.95 * dx / (C0 * math.sqrt(2)), rel=1e-15)


def test_one_dimensional_limit():
    assert courant_time_step(1.0, 1e12, 2.0, 0.5) == pytest.approx(0.5 * 1.0 / 2.0, rel=1e-12)


@pytest.mark.parametrize("args", [(0, 1, 1, 1), (1, -1, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)])
def test_cfl_rejects_non_positive(args):
    with pytest.raises(ValueError):
        courant_time_step(*args)


def test_cfl_above_one_needs_opt_in():
    with pytest.raises(ValueError):
        courant_time_step(1, 1, 1, 1.05)
    assert courant_time_step(1, 1, 1, 1.05, allow_unstable=True) == pytest.approx(1.05 / math.sqrt(2))


def test_max_phase_velocity_uses_fastest_medium():
    m = material_grid([[1.0, 4.0], [9.0, 4.0]], 0.0)
    assert max_phase_velocity(m) == pytest.approx(C0, rel=1e-12)
    m = material_grid([[4.0, 4.0], [9.0, 4.0]], 0.0)
    assert max_phase_velocity(m) == pytest.approx(C0 / 2, rel=1e-12)


# --- materials and scenario invariants ------------------------------------------

@pytest.mark.parametrize("kw", [dict(eps_r=0.5), dict(sigma=-1), dict(mu_r=0), dict(sigma_m=-0.1),
                                dict(density=-1), dict(eps_r=math.nan)])
def test_material_rejects_invalid(kw):
    with pytest.raises(ScenarioSemanticError):
        Material(**kw)


def test_low_eps_allowed_when_flagged():
    assert Material(eps_r=0.5, allow_low_eps=True).eps_r == 0.5


@pytest.mark.parametrize("kw,match", [
    (dict(nx=1, nz=5), "at least 2x2"),
    (dict(nx=5, nz=5, dx=0), "positive"),
    (dict(nx=5, nz=5, courant_factor=1.2), "courant"),
    (dict(nx=5, nz=5, n_steps=0), "n_steps"),
    (dict(nx=5, nz=5, probes=((1, 1), (5, 0))), "probe 1"),
])
def test_scenario_invariants(kw, match):
    with pytest.raises(ScenarioSemanticError, match=match):
        ScenarioSpec(**kw)


# --- rasterization -------------------------------------------------------------

def _rect(x0, z0, x1, z1, eps_r):
    return ShapeSpec("rectangle", dict(x0=x0, z0=z0, x1=x1, z1=z1), Material(eps_r=eps_r))


def test_empty_scenario_is_uniform_background():
    m = rasterize(ScenarioSpec(nx=7, nz=5, background=Material(eps_r=2.0, sigma=0.1)))
    assert np.all(m.eps == 2.0 * EPS0)
    assert np.all(m.sigma == 0.1)
    assert np.all(m.mu_hx == MU0) and np.all(m.mu_hz == MU0)
    assert np.array_equal(m.sigma_x, m.sigma) and np.array_equal(m.sigma_z, m.sigma)


def test_full_grid_rectangle():
    sc = ScenarioSpec(nx=6, nz=4, objects=(_rect(0, 0, 6e-3, 4e-3, 12.0),))
    assert np.all(rasterize(sc).eps == 12 * EPS0)


def test_rectangle_over_cells_two_to_four():
    dx = 1e-3
    sc = ScenarioSpec(nx=8, nz=3, objects=(_rect(2 * dx, 0, 5 * dx, 3 * dx, 4.0),))
    eps = rasterize(sc).eps
    for k in range(3):
        for i in range(8):
            x = (i + 0.5) * dx
            expected = 4.0 if 2 * dx <= x < 5 * dx else 1.0
            assert eps[k, i] == expected * EPS0


def _inside_oracle(shape, x, z):
    p = shape.params
    if shape.kind == "cylinder":
        return math.hypot(x - p["xc"], z - p["zc"]) <= p["radius"] * (1 + 1e-12)
    if shape.kind == "triangle":
        (x1, z1, x2, z2, x3, z3) = (p[n] for n in ("x1", "z1", "x2", "z2", "x3", "z3"))
        det = (z2 - z3) * (x1 - x3) + (x3 - x2) * (z1 - z3)
        a = ((z2 - z3) * (x - x3) + (x3 - x2) * (z - z3)) / det
        b = ((z3 - z1) * (x - x3) + (x1 - x3) * (z - z3)) / det
        return min(a, b, 1 - a - b) >= 0
    if shape.kind == "rectangle":
        return p["x0"] <= x < p["x1"] and p["z0"] <= z < p["z1"]
    normal, other = (x, z) if shape.axis == "x" else (z, x)
    return (p["position"] <= normal < p["position"] + p["thickness"]
            and p.get("start", -math.inf) <= other < p.get("end", math.inf))


SHAPES = [
    ShapeSpec("cylinder", dict(xc=10.3e-3, zc=9.1e-3, radius=6.2e-3), Material(eps_r=3)),
    ShapeSpec("triangle", dict(x1=2e-3, z1=3e-3, x2=17.5e-3, z2=5.5e-3, x3=6e-3, z3=18e-3), Material(eps_r=3)),
    ShapeSpec("rectangle", dict(x0=3.3e-3, z0=4.1e-3, x1=12.7e-3, z1=15.2e-3), Material(eps_r=3)),
    ShapeSpec("wall", dict(position=7.2e-3, thickness=3e-3), Material(eps_r=3), "x"),
    ShapeSpec("wall", dict(position=4e-3, thickness=2.5e-3, start=5e-3, end=14e-3), Material(eps_r=3), "z"),
]


@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: f"{s.kind}-{s.axis}")
def test_membership_matches_point_oracle(shape):
    sc = ScenarioSpec(nx=20, nz=20, objects=(shape,))
    m = rasterize(sc)
    pts = sample_points(20, 20, 1e-3, 1e-3)
    xe, ze = pts["ey"]
    for k in range(20):
        for i in range(20):
            inside = _inside_oracle(shape, xe[k, i], ze[k, i])
            assert (m.eps[k, i] == 3 * EPS0) == inside, (i, k)


def test_magnetic_material_sampled_at_h_points():
    shape = ShapeSpec("rectangle", dict(x0=2e-3, z0=2e-3, x1=5e-3, z1=5e-3), Material(mu_r=2.0, sigma_m=3.0))
    m = rasterize(ScenarioSpec(nx=8, nz=8, objects=(shape,)))
    for name, (x, z) in sample_points(8, 8, 1e-3, 1e-3).items():
        if name == "ey":
            continue
        inside = (x >= 2e-3) & (x < 5e-3) & (z >= 2e-3) & (z < 5e-3)
        mu = m.mu_hx if name == "hx" else m.mu_hz
        sm = m.sigma_m_hx if name == "hx" else m.sigma_m_hz
        assert np.array_equal(mu == 2 * MU0, inside)
        assert np.array_equal(sm == 3.0, inside)


def test_later_objects_overwrite_earlier():
    a = _rect(0, 0, 6e-3, 6e-3, 2.0)
    b = _rect(3e-3, 3e-3, 9e-3, 9e-3, 5.0)
    eps = rasterize(ScenarioSpec(nx=10, nz=10, objects=(a, b))).eps / EPS0
    assert eps[4, 4] == 5.0 and eps[1, 1] == 2.0 and eps[8, 8] == 5.0
    eps_rev = rasterize(ScenarioSpec(nx=10, nz=10, objects=(b, a))).eps / EPS0
    assert eps_rev[4, 4] == 2.0


def test_rasterize_idempotent():
    sc = ScenarioSpec(nx=20, nz=20, objects=tuple(SHAPES))
    a, b = rasterize(sc), rasterize(sc)
    assert np.array_equal(a.eps, b.eps) and np.array_equal(a.mu_hz, b.mu_hz)


def test_zero_area_shape_warns_and_is_skipped():
    flat = _rect(2e-3, 2e-3, 2e-3, 8e-3, 9.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        m = rasterize(ScenarioSpec(nx=10, nz=10, objects=(flat,)))
    assert any("zero area" in str(w.message) for w in caught)
    assert np.all(m.eps == EPS0)


def test_material_grid_is_read_only():
    m = rasterize(ScenarioSpec(nx=4, nz=4))
    with pytest.raises(ValueError):
        m.eps[0, 0] = 1.0


# --- coefficients ------------------------------------------------------------------

def test_vacuum_coefficients():
    dt = 1e-12
    c = compute_coefficients(material_grid(np.ones((3, 4)), 0.0), dt)
    assert np.all(c.ca == 1.0)
    assert np.all(c.cb == dt / EPS0)
    assert np.all(c.dax == 1.0) and np.all(c.daz == 1.0)
    assert np.all(c.dbx == dt / MU0 / 1e-3)
    assert np.all(c.cbx == c.cb / c.dx)


def test_ca_vanishes_at_unit_loss_ratio():
    dt = 1e-12
    sigma = 2 * EPS0 / dt
    ca, _ = electric_coefficients(np.array(sigma), np.array(EPS0), dt)
    assert abs(ca) < 1e-15


def test_coefficients_against_arbitrary_precision():
    mpmath.mp.dps = 50
    sigma, eps_r, dt = 0.01, 4.0, 1e-12
    c = compute_coefficients(material_grid([[eps_r]], sigma), dt)
    eps = mpmath.mpf(EPS0) * 4
    half = mpmath.mpf(sigma) * mpmath.mpf(dt) / (2 * eps)
    ca = (1 - half) / (1 + half)
    cb = (mpmath.mpf(dt) / eps) / (1 + half)
    assert abs(c.ca[0, 0] - float(ca)) <= 2 * math.ulp(float(ca))
    assert abs(c.cb[0, 0] - float(cb)) <= 2 * math.ulp(float(cb))


def test_magnetic_loss_coefficients_against_arbitrary_precision():
    mpmath.mp.dps = 50
    sm, mu_r, dt, dz = 40.0, 2.0, 1e-12, 1e-3
    c = compute_coefficients(material_grid([[1.0]], 0.0, mu_r=[[mu_r]], sigma_m=[[sm]], dz=dz), dt)
    mu = mpmath.mpf(MU0) * 2
    half = mpmath.mpf(sm) * mpmath.mpf(dt) / (2 * mu)
    da = (1 - half) / (1 + half)
    db = (mpmath.mpf(dt) / mu) / (1 + half) / mpmath.mpf(dz)
    assert abs(c.dax[0, 0] - float(da)) <= 2 * math.ulp(float(da))
    assert abs(c.dbx[0, 0] - float(db)) <= 4 * math.ulp(float(db))


def test_float32_mode():
    c = compute_coefficients(material_grid(np.ones((2, 2)), 0.0), 1e-12, dtype=np.float32)
    assert c.dtype == np.float32 and c.ca.flags.c_contiguous


@given(eps_r=st.floats(1, 100), sigma=st.floats(0, 1e3), dt=st.floats(1e-16, 1e-10))
def test_ca_bounds_when_loss_ratio_at_most_one(eps_r, sigma, dt):
    eps = eps_r * EPS0
    if sigma * dt / (2 * eps) > 1:
        sigma = 2 * eps / dt
    ca, cb = electric_coefficients(np.array(sigma), np.array(eps), dt)
    assert -1e-15 <= ca <= 1.0
    assert cb > 0
    if sigma == 0:
        assert ca == 1.0
    elif sigma * dt / (2 * eps) > 1e-15:
        assert ca < 1.0


@given(eps_r=st.floats(1, 100), sigma=st.floats(0, 10), power=st.integers(-8, 8))
def test_ca_homogeneous_in_sigma_and_eps(eps_r, sigma, power):
    # power-of-two scaling is exact in binary floating point
    scale = 2.0 ** power
    dt = 1e-12
    ca1, _ = electric_coefficients(np.array(sigma), np.array(eps_r * EPS0), dt)
    ca2, _ = electric_coefficients(np.array(sigma * scale), np.array(eps_r * EPS0 * scale), dt)
    assert ca1 == ca2


@given(eps_r=st.floats(1, 100), sigma=st.floats(0, 10), scale=st.floats(0.1, 10))
def test_ca_homogeneous_general_scale(eps_r, sigma, scale):
    dt = 1e-12
    ca1, _ = electric_coefficients(np.array(sigma), np.array(eps_r * EPS0), dt)
    ca2, _ = electric_coefficients(np.array(sigma * scale), np.array(eps_r * EPS0 * scale), dt)
    assert ca2 == pytest.approx(ca1, rel=1e-14, abs=1e-15)

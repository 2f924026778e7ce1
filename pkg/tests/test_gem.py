import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gemfield.bench import free_space_scenario
from gemfield.constants import C0
from gemfield.errors import DivergenceError
from gemfield.fdtd import FieldState, add_source, run, step_e, step_h
from gemfield.gem import (HiddenState, gather, gem_step, message_pass, run_gem, scatter,
                          to_field_state)
from gemfield.graph import E_PHASE, H_PHASE, FieldKind, build_graph, node_index
from gemfield.grid import ScenarioSpec, compute_coefficients, courant_time_step
from gemfield.pml import PmlSpec
from gemfield.scenario_io import generate_random_scenario
from gemfield.simulation import prepare
from gemfield.sources import SourceSpec
from oracles import material_grid, random_material_grid

DT = 1e-12
K = FieldKind


def _random_state(rng, nz, nx, split=False):
    s = FieldState.zeros(nz, nx, split=split)
    for name in ("hx", "hz", "ey", "eyx", "eyz"):
        if getattr(s, name) is not None:
            setattr(s, name, rng.standard_normal((nz, nx)))
    return s


def _vacuum_graph(nx=5, nz=5, split=False):
    c = compute_coefficients(material_grid(np.ones((nz, nx)), 0.0), DT)
    return c, build_graph(c, split=split)


def test_zero_state_stays_zero():
    _, g = _vacuum_graph(split=True)
    s = HiddenState.zeros(g)
    for _ in range(10):
        s = gem_step(g, s)
    assert not np.any(s.h) and s.n == 10


def test_unit_e_touches_its_four_h_nodes():
    _, g = _vacuum_graph()
    h = np.zeros(g.node_count)
    h[node_index(K.EY, 2, 2, 5, 5)] = 1.0
    out = message_pass(g, h, H_PHASE)
    changed = set(np.flatnonzero(out != h).tolist())
    assert changed == {node_index(K.HX, 2, 2, 5, 5), node_index(K.HX, 2, 3, 5, 5),
                       node_index(K.HZ, 2, 2, 5, 5), node_index(K.HZ, 3, 2, 5, 5)}


def test_message_pass_does_not_mutate_input(rng):
    _, g = _vacuum_graph()
    h = rng.standard_normal(g.node_count)
    before = h.copy()
    message_pass(g, h, E_PHASE)
    assert np.array_equal(h, before)


@pytest.mark.parametrize("phase", [H_PHASE, E_PHASE])
def test_phase_isolation(rng, phase):
    """A pass only rewrites nodes of its own phase."""
    c = compute_coefficients(random_material_grid(rng, 6, 4, magnetic=True), DT)
    g = build_graph(c)
    h = rng.standard_normal(g.node_count)
    out = message_pass(g, h, phase)
    other = g.phase != phase
    assert np.array_equal(out[other], h[other])
    assert np.all(out[~other] != h[~other])


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("split", [False, True])
def test_one_step_bit_exact_with_stencil(seed, split):
    rng = np.random.default_rng(seed)
    nx, nz = 7, 5
    c = compute_coefficients(random_material_grid(rng, nx, nz, magnetic=True, split_loss=split), DT)
    sources = (SourceSpec("gaussian", 2, 3, spread=1e-11),
               SourceSpec("gaussian", 5, geometry="line", k0=1, k1=4, spread=1e-11))
    g = build_graph(c, split=split, sources=sources)
    values = rng.standard_normal(2)

    fs = _random_state(rng, nz, nx, split)
    hs = scatter(fs, g)
    for _ in range(3):
        fs = step_e(step_h(fs, c), c)
        for s, v in zip(sources, values):
            add_source(fs, s.cells(nz), v)
        hs = gem_step(g, hs, values)
    assert np.array_equal(hs.h, scatter(fs, g).h)
    assert hs.n == fs.n == 3


@pytest.mark.parametrize("split", [False, True])
def test_scatter_gather_identity(rng, split):
    _, g = _vacuum_graph(4, 6, split)
    fs = _random_state(rng, 6, 4, split)
    back = to_field_state(scatter(fs, g), g)
    for name in ("hx", "hz", "ey", "eyx", "eyz"):
        a, b = getattr(fs, name), getattr(back, name)
        assert (a is None and b is None) or np.array_equal(a, b)
    assert np.array_equal(gather(scatter(fs, g).h, g, K.EY), fs.observable_ey())


def test_gather_missing_kind_raises():
    _, g = _vacuum_graph()
    with pytest.raises(ValueError, match="EYX"):
        gather(np.zeros(g.node_count), g, K.EYX)


def test_scatter_mode_mismatch():
    _, g = _vacuum_graph(split=True)
    with pytest.raises(ValueError):
        scatter(FieldState.zeros(5, 5), g)


def test_divergence_reports_node():
    _, g = _vacuum_graph()
    h = np.zeros(g.node_count)
    ey = node_index(K.EY, 1, 1, 5, 5)
    h[ey] = np.inf
    with pytest.raises(DivergenceError) as info:
        message_pass(g, h, E_PHASE)
    assert info.value.node == ey
    s = HiddenState(h, n=7)
    with pytest.raises(DivergenceError) as info:
        gem_step(g, s)
    assert info.value.step == 7


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_run_gem_equals_run(seed):
    sc = dataclasses.replace(generate_random_scenario(seed, 60), n_steps=300, snapshot_every=100)
    a, b = run(sc), run_gem(sc)
    assert np.array_equal(a.probes, b.probes)
    assert a.snapshots.keys() == b.snapshots.keys()
    assert all(np.array_equal(a.snapshots[n], b.snapshots[n]) for n in a.snapshots)
    assert b.metadata["backend"] == "gem" and a.metadata["backend"] == "fdtd"
    assert b.metadata["nodes"] == 4 * 60 * 60 and b.metadata["split"]


def test_parallel_within_tolerance():
    sc = dataclasses.replace(generate_random_scenario(5, 60), n_steps=300)
    a = run_gem(sc)
    b = run_gem(sc, ordered=False)
    scale = np.abs(a.probes).max()
    np.testing.assert_allclose(b.probes, a.probes, rtol=0, atol=1e-12 * scale)
    assert b.metadata["ordered"] is False


def test_free_space_250_for_1024_steps():
    sc = free_space_scenario(250, 1024)
    a, b = run(sc), run_gem(sc)
    scale = np.abs(a.probes).max()
    assert scale > 0
    assert np.abs(a.probes - b.probes).max() <= 1e-12 * scale


def test_vacuum_pml_split_stable_for_2000_steps():
    sc = free_space_scenario(60, 2000, pml=True)
    rec = run_gem(sc)
    assert rec.metadata["split"] and rec.valid
    assert np.all(np.isfinite(rec.probes))
    # the pulse has left the domain and been absorbed
    assert np.abs(rec.probes[0, -200:]).max() < 1e-3 * np.abs(rec.probes).max()


@settings(max_examples=15)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10), seed=st.integers(0, 2**16))
def test_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    c = compute_coefficients(random_material_grid(rng, 5, 4, magnetic=True), DT)
    g = build_graph(c)
    x, y = rng.standard_normal((2, g.node_count))
    combo = gem_step(g, HiddenState(a * x + b * y)).h
    parts = a * gem_step(g, HiddenState(x)).h + b * gem_step(g, HiddenState(y)).h
    np.testing.assert_allclose(combo, parts, rtol=0, atol=1e-12 * (abs(a) + abs(b) + 1) * np.abs(parts).max())


def test_courant_violation_diverges_with_partial_record():
    sc = ScenarioSpec(nx=30, nz=30, n_steps=2000, probes=((15, 15),),
                      sources=(SourceSpec("gaussian", 15, 15, spread=3e-11),))
    dt = courant_time_step(1e-3, 1e-3, C0, 1.05, allow_unstable=True)
    with pytest.raises(DivergenceError) as info:
        run_gem(setup=prepare(sc, dt=dt))
    err = info.value
    assert err.record is not None and not err.record.valid
    assert err.record.n_recorded == err.step


def test_pml_plain_mode_runs():
    sc = dataclasses.replace(free_space_scenario(40, 100), pml=PmlSpec(thickness=5))
    a = run(sc, split=False)
    b = run_gem(sc, split=False)
    assert np.array_equal(a.probes, b.probes) and not b.metadata["split"]

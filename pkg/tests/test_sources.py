import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gemfield.sources import SOURCE_KINDS, SourceSpec, gaussian_spread_for_bandwidth, source_series, waveform


def test_gaussian_peak_at_center():
    s = SourceSpec("gaussian", 0, 0, amplitude=2.5, spread=1e-10, t0=3e-10)
    assert waveform(s, 3e-10) == 2.5


def test_modulated_gaussian_zero_at_center():
    s = SourceSpec("modulated_gaussian", 0, 0, f0=1e9, spread=1e-9)
    assert waveform(s, s.center) == 0.0


def test_sinusoid_closed_form():
    s = SourceSpec("sinusoid", 0, 0, amplitude=3.0, f0=2e9)
    t = np.linspace(0, 2e-9, 17)
    np.testing.assert_array_equal(waveform(s, t), 3.0 * np.sin(2 * np.pi * 2e9 * t))


def test_default_center_is_four_spreads():
    assert SourceSpec("gaussian", 0, 0, spread=2e-11).center == 8e-11
    assert SourceSpec("sinusoid", 0, 0, f0=1e9).center == 0.0


@pytest.mark.parametrize("kw", [
    dict(kind="square", spread=1), dict(kind="gaussian", spread=0), dict(kind="sinusoid"),
    dict(kind="modulated_gaussian", spread=1e-9), dict(kind="gaussian", spread=1, amplitude=math.inf),
    dict(kind="gaussian", spread=1, geometry="plane"), dict(kind="gaussian", spread=1, start=-1),
])
def test_invalid_source_rejected(kw):
    with pytest.raises(ValueError):
        SourceSpec(i=0, k=0, **kw)


@given(kind=st.sampled_from(SOURCE_KINDS), a=st.floats(-1e3, 1e3), t=st.floats(0, 1e-6),
       f0=st.floats(1e6, 1e12), spread=st.floats(1e-13, 1e-7))
def test_waveform_bounded_by_amplitude(kind, a, t, f0, spread):
    s = SourceSpec(kind, 0, 0, amplitude=a, f0=f0, spread=spread)
    assert abs(waveform(s, t)) <= abs(a) * (1 + 1e-15)


@given(spread=st.floats(1e-13, 1e-7), x=st.floats(8.0001, 100))
def test_pulse_decay_beyond_eight_spreads(spread, x):
    s = SourceSpec("gaussian", 0, 0, spread=spread, t0=0.0)
    assert abs(waveform(s, x * spread)) < 1e-12
    assert abs(waveform(s, -x * spread)) < 1e-12


def test_gaussian_spectrum_by_dft():
    spread, dt = 1e-10, 1e-12
    s = SourceSpec("gaussian", 0, 0, spread=spread, t0=2e-9)
    t = np.arange(40000) * dt
    spec = np.abs(np.fft.rfft(waveform(s, t)))
    freqs = np.fft.rfftfreq(t.size, dt)
    assert np.argmax(spec) == 0
    # amplitude spectrum exp(-(2 pi f s)^2 / 2) halves its power where 2 pi f s = sqrt(ln 2)
    j = np.argmax(spec < spec[0] / math.sqrt(2))
    half_power = np.interp(-spec[0] / math.sqrt(2), -spec[j - 1:j + 1], freqs[j - 1:j + 1])
    expected = math.sqrt(math.log(2)) / (2 * math.pi * spread)
    assert half_power == pytest.approx(expected, rel=0.02)


def test_bandwidth_spread_gives_minus_20_db_at_edge():
    f_edge, dt = 6.8e9, 1e-13
    s = SourceSpec("gaussian", 0, 0, spread=gaussian_spread_for_bandwidth(f_edge), t0=2e-9)
    n = 40000
    spec = np.abs(np.fft.rfft(waveform(s, np.arange(n) * dt)))
    freqs = np.fft.rfftfreq(n, dt)
    level = 20 * np.log10(np.interp(f_edge, freqs, spec) / spec[0])
    assert level == pytest.approx(-20.0, abs=0.05)


def test_series_respects_start_step():
    s = SourceSpec("gaussian", 0, 0, spread=1e-11, start=5)
    dt = 2e-12
    series = source_series(s, 20, dt)
    assert np.all(series[:5] == 0)
    for n in range(5, 20):
        assert series[n] == waveform(s, (n - 5) * dt)


def test_zero_amplitude_series_is_zero():
    s = SourceSpec("modulated_gaussian", 0, 0, amplitude=0.0, f0=1e9, spread=1e-9)
    assert not np.any(source_series(s, 100, 1e-11))


def test_line_cells_cover_column():
    s = SourceSpec("gaussian", 4, geometry="line", spread=1e-9)
    i, k = s.cells(12)
    assert np.all(i == 4) and np.array_equal(k, np.arange(12))
    i, k = SourceSpec("gaussian", 4, geometry="line", k0=3, k1=7, spread=1e-9).cells(12)
    assert np.array_equal(k, [3, 4, 5, 6])


@pytest.mark.parametrize("spec,inside", [
    (SourceSpec("gaussian", 3, 3, spread=1), True),
    (SourceSpec("gaussian", 10, 3, spread=1), False),
    (SourceSpec("gaussian", 3, geometry="line", k0=2, k1=11, spread=1), False),
    (SourceSpec("gaussian", 3, geometry="line", k0=5, k1=5, spread=1), False),
])
def test_inside(spec, inside):
    assert spec.inside(10, 10) is inside

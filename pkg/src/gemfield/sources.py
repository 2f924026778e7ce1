"""Excitation waveforms and source placement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

SourceKind = Literal["sinusoid", "gaussian", "modulated_gaussian"]
SOURCE_KINDS: tuple[str, ...] = ("sinusoid", "gaussian", "modulated_gaussian")


@dataclass(frozen=True)
class SourceSpec:
    """A soft (additive) E_y source.

    ``geometry`` is ``"point"`` (cell ``(i, k)``) or ``"line"`` (column ``i``,
    rows ``k0 <= k < k1``; ``k1=None`` means the full column). ``t0`` defaults
    to four spreads for pulses so the waveform starts near zero. The waveform
    clock starts at time step ``start``.
    """

    kind: SourceKind
    i: int
    k: int = 0
    geometry: Literal["point", "line"] = "point"
    amplitude: float = 1.0
    f0: float = 0.0
    spread: float = 0.0
    t0: float | None = None
    start: int = 0
    k0: int = 0
    k1: int | None = None

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.geometry not in ("point", "line"):
            raise ValueError(f"unknown source geometry {self.geometry!r}")
        if not math.isfinite(self.amplitude):
            raise ValueError("source amplitude must be finite")
        if self.kind in ("gaussian", "modulated_gaussian") and not self.spread > 0:
            raise ValueError(f"{self.kind} source needs spread > 0")
        if self.kind in ("sinusoid", "modulated_gaussian") and not self.f0 > 0:
            raise ValueError(f"{self.kind} source needs f0 > 0")
        if self.start < 0:
            raise ValueError("source start step must be >= 0")

    @property
    def center(self) -> float:
        if self.t0 is not None:
            return self.t0
        return 4.0 * self.spread if self.kind != "sinusoid" else 0.0

    def cells(self, nz: int) -> tuple[np.ndarray, np.ndarray]:
        """Return the ``(i, k)`` index arrays of the excited E_y cells."""
        if self.geometry == "point":
            return np.array([self.i]), np.array([self.k])
        k1 = nz if self.k1 is None else self.k1
        ks = np.arange(self.k0, k1)
        return np.full(ks.shape, self.i), ks

    def inside(self, nx: int, nz: int) -> bool:
        if not 0 <= self.i < nx:
            return False
        if self.geometry == "point":
            return 0 <= self.k < nz
        k1 = nz if self.k1 is None else self.k1
        return 0 <= self.k0 < k1 <= nz


def waveform(spec: SourceSpec, t):
    """Evaluate the source waveform at time(s) ``t`` (seconds)."""
    t = np.asarray(t, dtype=float)
    a = spec.amplitude
    if spec.kind == "sinusoid":
        out = a * np.sin(2 * np.pi * spec.f0 * t)
    else:
        tau = t - spec.center
        envelope = np.exp(-(tau**2) / (2 * spec.spread**2))
        if spec.kind == "gaussian":
            out = a * envelope
        else:
            out = a * envelope * np.sin(2 * np.pi * spec.f0 * tau)
    return out if out.ndim else float(out)


def source_series(spec: SourceSpec, n_steps: int, dt: float) -> np.ndarray:
    """Per-step injected amplitude for steps ``0 .. n_steps-1``."""
    n = np.arange(n_steps)
    out = np.zeros(n_steps)
    on = n >= spec.start
    out[on] = waveform(spec, (n[on] - spec.start) * dt)
    return out


def gaussian_spread_for_bandwidth(f_edge: float, level_db: float = -20.0) -> float:
    """Spread of a baseband Gaussian whose spectrum is ``level_db`` down at ``f_edge``.

    The amplitude spectrum of exp(-t^2/2s^2) falls as exp(-(2 pi f s)^2 / 2).
    """
    drop = -level_db / 20.0 * math.log(10.0)
    return math.sqrt(2.0 * drop) / (2.0 * math.pi * f_edge)

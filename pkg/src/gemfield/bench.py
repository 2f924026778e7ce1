"""Wall-clock benchmark of the two backends on free-space grids."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .constants import C0
from .errors import DivergenceError
from .fdtd import run
from .gem import run_gem
from .graph import build_graph
from .grid import ScenarioSpec
from .pml import PmlSpec
from .simulation import prepare
from .sources import SourceSpec, gaussian_spread_for_bandwidth

BACKENDS = ("fdtd", "gem")


def free_space_scenario(size: int, steps: int, *, dx: float = 1e-3, pml: bool = False) -> ScenarioSpec:
    """Square vacuum grid with a centred Gaussian pulse and a probe beside it."""
    c = size // 2
    spread = gaussian_spread_for_bandwidth(C0 / (20 * dx))
    return ScenarioSpec(
        nx=size, nz=size, dx=dx, dz=dx, n_steps=steps,
        sources=(SourceSpec("gaussian", c, c, spread=spread),),
        probes=((min(c + 1, size - 1), c),),
        pml=PmlSpec() if pml else None,
    )


@dataclass
class BenchEntry:
    size: int
    times: list[float]
    build_s: float = 0.0
    diverged: bool = False

    @property
    def reps(self) -> int:
        return len(self.times)

    @property
    def mean(self) -> float:
        return float(np.mean(self.times)) if self.times else math.nan

    @property
    def ci95(self) -> float:
        """Half-width of the 95% Student-t confidence interval of the mean."""
        n = len(self.times)
        if n < 2:
            return math.nan
        return float(stats.t.ppf(0.975, n - 1) * np.std(self.times, ddof=1) / math.sqrt(n))


@dataclass
class BenchReport:
    backend: str
    steps: int
    ordered: bool
    entries: list[BenchEntry] = field(default_factory=list)

    def per_step(self) -> dict[int, float]:
        return {e.size: e.mean / self.steps for e in self.entries if not e.diverged}

    def growth(self) -> list[tuple[int, int, float]]:
        """``(size, next size, time ratio)`` for consecutive measured sizes."""
        ps = sorted(self.per_step().items())
        return [(s0, s1, t1 / t0) for (s0, t0), (s1, t1) in zip(ps, ps[1:])]

    def to_dict(self) -> dict:
        out = {"backend": self.backend, "steps": self.steps, "ordered": self.ordered, "entries": []}
        for e in self.entries:
            d = asdict(e)
            d.update(mean=e.mean, ci95=e.ci95, reps=e.reps, per_step=e.mean / self.steps)
            out["entries"].append(d)
        out["growth"] = [{"from": a, "to": b, "ratio": r} for a, b, r in self.growth()]
        return out

    def to_text(self) -> str:
        lines = [f"backend {self.backend}{' (ordered)' if self.backend == 'gem' and self.ordered else ''}, "
                 f"{self.steps} steps",
                 f"{'size':>6} {'reps':>4} {'mean [s]':>11} {'95% CI [s]':>11} "
                 f"{'per step [ms]':>13} {'build [s]':>9}"]
        for e in self.entries:
            if e.diverged:
                lines.append(f"{e.size:>6}  DIVERGED")
                continue
            lines.append(f"{e.size:>6} {e.reps:>4} {e.mean:>11.4f} {e.ci95:>11.4f} "
                         f"{1e3 * e.mean / self.steps:>13.4f} {e.build_s:>9.3f}")
        for a, b, r in self.growth():
            lines.append(f"growth {a} -> {b}: {r:.2f}x")
        return "\n".join(lines)


def bench(backend: str, sizes, reps: int = 5, steps: int = 1024, *, ordered: bool = True,
          pml: bool = False, progress=None) -> BenchReport:
    """Time whole runs (excluding setup and graph build) per grid size."""
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if reps < 2:
        raise ValueError("reps must be >= 2 for a confidence interval")
    report = BenchReport(backend, steps, ordered)
    # compile the kernels outside the timed region
    _run_once(backend, prepare(free_space_scenario(16, 4, pml=pml)), ordered)
    for size in sizes:
        setup = prepare(free_space_scenario(size, steps, pml=pml))
        entry = BenchEntry(size, [])
        graph = None
        if backend == "gem":
            t0 = time.perf_counter()
            graph = build_graph(setup.coeffs, setup.split, setup.scenario.sources)
            entry.build_s = time.perf_counter() - t0
        for _ in range(reps):
            t0 = time.perf_counter()
            try:
                _run_once(backend, setup, ordered, graph)
            except DivergenceError:
                entry.diverged = True
                break
            entry.times.append(time.perf_counter() - t0)
            if progress is not None:
                progress(size, entry.times[-1])
        report.entries.append(entry)
        del graph
    return report


def _run_once(backend, setup, ordered, graph=None):
    if backend == "fdtd":
        return run(setup=setup)
    return run_gem(setup=setup, ordered=ordered, graph=graph)

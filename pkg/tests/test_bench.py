import json

import pytest

from gemfield.bench import BenchEntry, BenchReport, bench, free_space_scenario


def test_rejects_single_rep():
    with pytest.raises(ValueError, match="reps"):
        bench("fdtd", [50], reps=1)


def test_rejects_unknown_backend():
    with pytest.raises(ValueError, match="backend"):
        bench("fem", [50])


def test_free_space_scenario():
    sc = free_space_scenario(51, 10, pml=True)
    assert sc.sources[0].i == sc.sources[0].k == 25 and sc.probes == ((26, 25),)
    assert sc.pml is not None


def test_ci95_closed_form():
    # with 2 degrees of freedom t_p = (2p - 1) / sqrt(2 p (1 - p)); sample std of (1, 2, 3) is 1
    p = 0.975
    t = (2 * p - 1) / (2 * p * (1 - p)) ** 0.5
    e = BenchEntry(10, [1.0, 2.0, 3.0])
    assert e.mean == 2.0
    # scipy's quantile routine is accurate to about 1e-11 relative
    assert e.ci95 == pytest.approx(t / 3**0.5, rel=1e-9)


@pytest.mark.parametrize("backend", ["fdtd", "gem"])
def test_small_smoke_run(backend):
    seen = []
    report = bench(backend, [50, 60], reps=2, steps=20, progress=lambda s, t: seen.append(s))
    assert seen == [50, 50, 60, 60]
    assert [e.size for e in report.entries] == [50, 60]
    assert all(e.reps == 2 and e.mean < 1.0 for e in report.entries)
    assert (report.entries[0].build_s > 0) == (backend == "gem")
    (a, b, ratio), = report.growth()
    assert (a, b) == (50, 60) and ratio > 0
    text = report.to_text()
    assert "growth 50 -> 60" in text
    d = json.loads(json.dumps(report.to_dict()))
    assert d["entries"][1]["per_step"] == pytest.approx(report.per_step()[60])


def test_diverged_entries_excluded():
    r = BenchReport("gem", 10, True, [BenchEntry(10, [1.0, 1.0]), BenchEntry(20, [], diverged=True)])
    assert r.per_step() == {10: 0.1} and r.growth() == []
    assert "DIVERGED" in r.to_text()

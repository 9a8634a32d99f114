import numpy as np
import pytest

from colwave.coefficients import PiecewiseConstantCoeff, RegularizedCoeff
from colwave.energy import (
    EnergyTrace,
    energy_trace,
    gronwall_bound,
    nonconservative_growth_factor,
    trace_csv,
)
from colwave.mollifier import Mollifier, ScaleFn
from colwave.solvers import Grid1D, solve_wave_x


def smooth_bump(x, x0=0.0, w=1.0):
    x = np.asarray(x, dtype=float)
    z = (x - x0) / w
    out = np.zeros_like(z)
    m = np.abs(z) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - z[m] ** 2))
    return out


def _rc(variable, eps=0.1):
    base = PiecewiseConstantCoeff((0.0 if variable == "space" else 1.0,), (1.0, 2.0), variable)
    return RegularizedCoeff(base, Mollifier(), ScaleFn("standard"), eps)


@pytest.fixture(scope="module")
def conservative_record():
    g = Grid1D(-4.0, 4.0, 2048, 2.0)
    fam = solve_wave_x(
        _rc("space"),
        None,
        lambda x: smooth_bump(x, -1.5, 0.4),
        g,
        conservative=True,
        store_times=np.linspace(0.0, 2.0, 21),
        store_vw=True,
    )
    return fam.records[0]


def test_conservative_energy_drift_small(conservative_record):
    tr = energy_trace(conservative_record, "conservative_x")
    assert tr.E[0] > 0.0
    assert tr.max_relative_drift < 1e-3


def test_energy_matches_direct_sum(conservative_record):
    rec = conservative_record
    tr = energy_trace(rec, "conservative_x")
    v = rec.fields["v"][3]
    w = rec.fields["w"][3]
    direct = float(np.trapezoid(0.5 * (v**2 + w**2), dx=rec.grid.dx))
    assert tr.E[3] == pytest.approx(direct, rel=1e-12)
    assert tr.eps == rec.eps
    assert tr.form == "conservative_x"


def test_energy_trace_rejects_unknown_form(conservative_record):
    with pytest.raises(ValueError):
        energy_trace(conservative_record, "conservative")


def test_energy_trace_requires_vw():
    g = Grid1D(-4.0, 4.0, 2048, 0.2)
    fam = solve_wave_x(_rc("space"), None, lambda x: smooth_bump(x, -1.5, 0.4), g)
    with pytest.raises(ValueError):
        energy_trace(fam.records[0], "conservative_x")


def test_gronwall_bound_closed_form():
    rc = _rc("time", eps=0.05)
    assert gronwall_bound(rc, 0.0) == pytest.approx(1.0)
    # after the full 1 -> 2 jump: (c1/c0)^2 = 4, independent of eps
    assert gronwall_bound(rc, 3.0) == pytest.approx(4.0, rel=1e-12)
    assert gronwall_bound(_rc("time", eps=0.01), 3.0) == pytest.approx(4.0, rel=1e-12)
    vals = gronwall_bound(rc, np.array([0.0, 3.0]))
    assert vals == pytest.approx([1.0, 4.0])
    with pytest.raises(ValueError):
        gronwall_bound(_rc("space"), 1.0)


def test_nonconservative_factor_blows_up_with_eps():
    m = Mollifier()
    for eps in (0.1, 0.05):
        rc = _rc("space", eps=eps)
        expected = np.exp(1.5 * 1.0 * m.normalization / eps)
        assert nonconservative_growth_factor(rc, 1.5) == pytest.approx(expected, rel=1e-4)
    assert nonconservative_growth_factor(_rc("space", 0.05), 1.5) > (
        nonconservative_growth_factor(_rc("space", 0.1), 1.5) ** 1.5
    )


def test_trace_csv_format(tmp_path):
    tr = EnergyTrace(
        eps=0.1, form="conservative_x", times=np.array([0.0, 0.5]), E=np.array([1.0, 1.000001])
    )
    out = tmp_path / "trace.csv"
    trace_csv(tr, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,E"
    assert lines[1].startswith("0,")
    assert float(lines[2].split(",")[1]) == pytest.approx(1.000001)

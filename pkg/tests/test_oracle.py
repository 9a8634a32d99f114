import numpy as np
import pytest

from colwave.oracle import (
    AssociationVerdict,
    ConnectedSolution,
    PiecewiseTSolution,
    TestFunction,
    associate_check,
    connected_eval,
    delta_jump_locus,
    delta_plateau,
    delta_solution_eval,
    pair_delta_oracle,
    pair_gridded,
    three_region_limit,
    transmission_residuals,
    two_region_limit,
)


def smooth_bump(x, x0=0.0, w=1.0):
    x = np.asarray(x, dtype=float)
    z = (x - x0) / w
    out = np.zeros_like(z)
    m = np.abs(z) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - z[m] ** 2))
    return out


@pytest.fixture
def cs():
    return ConnectedSolution(
        c_minus=1.0,
        c_plus=2.0,
        v0=lambda x: smooth_bump(x, -2.0, 0.5),
        w0=lambda x: smooth_bump(x, 3.0, 0.5),
    )


def test_interface_coefficient_identity(cs):
    # transmit - reflect = 1 exactly (conservation of the jump relations)
    assert cs.transmit - cs.reflect == 1.0
    assert cs.transmit == pytest.approx(4.0 / 3.0)
    assert cs.reflect == pytest.approx(1.0 / 3.0)


def test_transmission_residuals_negligible(cs):
    ts = np.linspace(0.0, 3.0, 64)
    r1, r2 = transmission_residuals(cs, ts)
    assert np.max(np.abs(r1)) <= 1e-12
    assert np.max(np.abs(r2)) <= 1e-12


def test_connected_constant_speed_is_dalembert():
    c = 1.7
    cs = ConnectedSolution(c, c, v0=lambda x: smooth_bump(x, -2.0), w0=lambda x: smooth_bump(x, 2.0))
    xs = np.linspace(-4.0, 4.0, 101)
    v, w = connected_eval(cs, 0.8, xs)
    assert np.allclose(v, smooth_bump(xs - c * 0.8, -2.0), atol=1e-14)
    assert np.allclose(w, smooth_bump(xs + c * 0.8, 2.0), atol=1e-14)


def test_connected_u_continuous_at_interface(cs):
    for t in (0.5, 1.5, 2.5):
        _, _, ul = connected_eval(cs, t, -1e-9, with_u=True)
        _, _, ur = connected_eval(cs, t, 1e-9, with_u=True)
        assert ul == pytest.approx(ur, abs=1e-7)


def test_connected_vw_solve_transport(cs):
    # v_t + c v_x = 0 and w_t - c w_x = 0 away from the interface
    step = 1e-6
    for t, x in [(1.0, -0.7), (1.3, 0.9), (0.4, -2.2)]:
        c = cs.c_minus if x < 0 else cs.c_plus
        vt = (connected_eval(cs, t + step, x)[0] - connected_eval(cs, t - step, x)[0]) / (2 * step)
        vx = (connected_eval(cs, t, x + step)[0] - connected_eval(cs, t, x - step)[0]) / (2 * step)
        wt = (connected_eval(cs, t + step, x)[1] - connected_eval(cs, t - step, x)[1]) / (2 * step)
        wx = (connected_eval(cs, t, x + step)[1] - connected_eval(cs, t, x - step)[1]) / (2 * step)
        assert float(vt + c * vx) == pytest.approx(0.0, abs=1e-6)
        assert float(wt - c * wx) == pytest.approx(0.0, abs=1e-6)


def test_connected_u_matches_independent_quadrature(cs):
    from scipy.integrate import quad

    for t, x in [(1.0, -0.7), (1.3, 0.9), (2.0, 0.4)]:
        got = float(connected_eval(cs, t, x, with_u=True)[2])
        cross = -x / cs.c_minus if x < 0 else x / cs.c_plus
        pts = [cross] if 0.0 < cross < t else []
        ref, err = quad(
            lambda s: 0.5 * sum(map(float, connected_eval(cs, s, x))),
            0.0,
            t,
            points=pts,
            limit=200,
        )
        assert got == pytest.approx(ref, abs=1e-9)


def test_delta_plateau_value():
    assert delta_plateau(1.0, 2.0) == pytest.approx(2.0 / 3.0, rel=1e-15)


def test_delta_solution_regions():
    u = lambda t, x: delta_solution_eval(1.0, 2.0, t, x)
    # before reaching the interface: expanding step of height 1/(2 c_minus)
    assert u(0.3, -1.0) == pytest.approx(0.5)
    assert u(0.3, -2.0) == 0.0
    # plateau above the crossing
    assert u(1.8, 0.3) == pytest.approx(2.0 / 3.0)
    # transmitted front at x = -2 + 2t = 1.0
    assert u(1.5, 0.9) == pytest.approx(2.0 / 3.0)
    assert u(1.5, 1.1) == 0.0
    # outside the backward cone
    assert u(1.0, -3.5) == 0.0


def test_delta_solution_jump_locus_matches_rays():
    locus = dict((lbl, (f, rng)) for lbl, f, rng in delta_jump_locus(1.0, 2.0))
    f, rng = locus["incident_left"]
    assert f(0.6) == pytest.approx(-1.6)
    f, rng = locus["incident_right"]
    assert f(0.6) == pytest.approx(-0.4)
    assert rng == (0.0, 1.0)
    f, rng = locus["reflected"]
    assert f(1.8) == pytest.approx(-0.8)
    assert rng[0] == 1.0
    f, rng = locus["transmitted"]
    assert f(1.8) == pytest.approx(1.6)
    # each locus line is an actual jump of the solution
    for lbl, (f, rng) in locus.items():
        t = 1.5 if rng[1] == np.inf else 0.5 * (rng[0] + rng[1])
        x = float(f(t))
        jump = abs(
            delta_solution_eval(1.0, 2.0, t, x + 1e-6) - delta_solution_eval(1.0, 2.0, t, x - 1e-6)
        )
        assert jump > 0.05, lbl


def test_piecewise_t_alpha_beta():
    sol = PiecewiseTSolution(1.0, 2.0, F=lambda x: np.zeros_like(x), G=lambda x: np.zeros_like(x))
    assert sol.alpha == pytest.approx(0.75)
    assert sol.beta == pytest.approx(0.25)
    assert sol.alpha + sol.beta == pytest.approx(1.0)


def test_piecewise_t_continuity_at_jump():
    sol = PiecewiseTSolution(
        1.0, 2.0, F=lambda x: smooth_bump(x, 0.0), G=lambda x: smooth_bump(x, 1.0)
    )
    xs = np.linspace(-4.0, 4.0, 64)
    step = 1e-6
    below = sol(sol.t_jump - step, xs)
    above = sol(sol.t_jump + step, xs)
    assert np.allclose(below, above, atol=1e-5)
    # dt u continuity
    dt_below = (sol(sol.t_jump - step, xs) - sol(sol.t_jump - 3 * step, xs)) / (2 * step)
    dt_above = (sol(sol.t_jump + 3 * step, xs) - sol(sol.t_jump + step, xs)) / (2 * step)
    assert np.allclose(dt_below, dt_above, atol=1e-4)


def test_piecewise_t_constant_speed_reduces_to_dalembert():
    sol = PiecewiseTSolution(
        1.5, 1.5, F=lambda x: smooth_bump(x, 0.0), G=lambda x: smooth_bump(x, 1.0)
    )
    xs = np.linspace(-4.0, 4.0, 64)
    for t in (0.5, 1.7):
        ref = smooth_bump(xs - 1.5 * t, 0.0) + smooth_bump(xs + 1.5 * t, 1.0)
        assert np.allclose(sol(t, xs), ref, atol=1e-14)


def test_piecewise_t_solves_wave_equation_above_jump():
    sol = PiecewiseTSolution(
        1.0, 2.0, F=lambda x: smooth_bump(x, 0.0), G=lambda x: smooth_bump(x, 1.0)
    )
    step = 1e-4
    t, x = 1.6, 0.8
    utt = (sol(t + step, x) - 2 * sol(t, x) + sol(t - step, x)) / step**2
    uxx = (sol(t, x + step) - 2 * sol(t, x) + sol(t, x - step)) / step**2
    assert utt == pytest.approx(4.0 * uxx, rel=1e-4, abs=1e-5)


def test_region_limits():
    u0 = lambda x: smooth_bump(x, 0.0, 2.0)
    f3 = three_region_limit(u0)
    assert f3(1.0, 2.0) == pytest.approx(u0(1.0))
    assert f3(1.0, -2.0) == pytest.approx(u0(-1.0))
    assert f3(1.0, 0.3) == pytest.approx(u0(0.0))
    f2 = two_region_limit(u0)
    assert f2(1.0, 0.5) == pytest.approx(u0(1.5))
    assert f2(1.0, -0.5) == pytest.approx(u0(-1.5))


def test_testfunction_normalization_and_support():
    psi = TestFunction(1.8, 0.3, 0.15)
    assert psi.l1_norm == pytest.approx(1.0)
    assert psi.t_support == pytest.approx((1.65, 1.95))
    assert psi.x_support == pytest.approx((0.15, 0.45))
    assert psi(1.8, 0.6) == 0.0
    ts = np.linspace(1.65, 1.95, 401)
    xs = np.linspace(0.15, 0.45, 401)
    vals = psi(ts[:, None], xs[None, :])
    mass = np.trapezoid(np.trapezoid(vals, xs, axis=1), ts)
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_testfunction_x_antideriv():
    psi = TestFunction(1.0, 0.0, 0.2)
    t = 1.05
    xs = np.linspace(-0.3, 0.3, 41)
    step = 1e-6
    fd = (psi.x_antideriv(t, xs + step) - psi.x_antideriv(t, xs - step)) / (2 * step)
    assert np.allclose(fd, psi(t, xs), atol=1e-6)


def test_pair_delta_oracle_vs_dense_quadrature():
    psi = TestFunction(1.4, -0.5, 0.3)
    got = pair_delta_oracle(1.0, 2.0, psi)
    ts = np.linspace(*psi.t_support, 801)
    xs = np.linspace(-3.5, 2.7, 4001)
    u = delta_solution_eval(1.0, 2.0, ts[:, None], xs[None, :])
    ref = pair_gridded(ts, xs, u * 0 + u, psi)
    assert got == pytest.approx(ref, abs=5e-6)


def test_pair_delta_oracle_plateau_region():
    psi = TestFunction(1.8, 0.3, 0.15)
    assert pair_delta_oracle(1.0, 2.0, psi) == pytest.approx(2.0 / 3.0, abs=1e-10)


def test_associate_check_pass_and_fail():
    eps = 0.1 * 0.7 ** np.arange(10)
    good = 1.0 + 0.05 * eps
    v = associate_check(eps, good, 1.0)
    assert isinstance(v, AssociationVerdict) and v.passed
    stuck = np.full(10, 1.5)
    assert not associate_check(eps, stuck, 1.0).passed
    growing = 1.0 + 0.05 / np.maximum(eps, 1e-12)
    assert not associate_check(eps, growing, 1.0).passed

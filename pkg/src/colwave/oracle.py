"""Closed-form reference solutions and association checks.

* ConnectedSolution: the classical transmission-problem solution for a speed
  jump c_minus -> c_plus at x = 0, written in the characteristic variables
  v = (dt - c dx)u, w = (dt + c dx)u.  Four regions separated by x = -c_-t,
  x = 0, x = c_+t; the interface matching

      v_+ = 2c_+/(c_+ + c_-) v_-  +  (c_- - c_+)/(c_+ + c_-) w_+
      w_- = 2c_-/(c_+ + c_-) w_+  +  (c_+ - c_-)/(c_+ + c_-) v_-

  encodes the transmission/reflection coefficients.
* delta_solution_eval: the same problem with u0 = 0, u1 = delta(x+1), reduced
  to an explicit piecewise-Heaviside formula for u itself.
* piecewise_t_solution: the speed jump in time (c0 -> c1 at t = 1); d'Alembert
  below, re-expansion above with continuity of (u, dt u).  The interface
  amplitudes follow from that 2x2 matching: each family re-expands with
  transmit coefficient (c1+c0)/(2c1) and refract coefficient (c1-c0)/(2c1).
* associate_check: weak-convergence verdicts of an eps-family of pairings
  against a reference pairing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mollifier import Mollifier, phi_antideriv, phi_eval

__all__ = [
    "ConnectedSolution",
    "connected_eval",
    "delta_solution_eval",
    "delta_jump_locus",
    "delta_plateau",
    "PiecewiseTSolution",
    "TestFunction",
    "AssociationVerdict",
    "associate_check",
    "pair_delta_oracle",
    "pair_gridded",
    "three_region_limit",
    "two_region_limit",
]

_GL8 = np.polynomial.legendre.leggauss(8)


def _heaviside(z):
    return 0.5 * (np.sign(z) + 1.0)  # midpoint convention on the jump


@dataclass(frozen=True)
class ConnectedSolution:
    c_minus: float
    c_plus: float
    v0: Callable
    w0: Callable
    u0: Callable = lambda x: np.zeros_like(np.asarray(x, dtype=float))

    @property
    def transmit(self) -> float:
        return 2.0 * self.c_plus / (self.c_plus + self.c_minus)

    @property
    def reflect(self) -> float:
        return (self.c_plus - self.c_minus) / (self.c_plus + self.c_minus)


def connected_eval(cs: ConnectedSolution, t, x, with_u: bool = False):
    """(v, w[, u]) of the connected solution; x = 0 returns the common limit."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    t, x = np.broadcast_arrays(t, x)
    cm, cp = cs.c_minus, cs.c_plus
    S = cm + cp
    v0, w0 = cs.v0, cs.w0

    v = np.where(x < 0.0, v0(x - cm * t), 0.0)
    w = np.where(x < 0.0, 0.0, w0(x + cp * t))
    # region I vs II split for w on x<0; III vs IV split for v on x>0
    reg2 = (x < 0.0) & (x + cm * t > 0.0)
    reg1 = (x < 0.0) & ~reg2
    reg3 = (x >= 0.0) & (x - cp * t < 0.0)
    reg4 = (x >= 0.0) & ~reg3
    w = np.where(reg1, w0(x + cm * t), w)
    w = np.where(
        reg2,
        (2.0 * cm / S) * w0((cp / cm) * (x + cm * t)) + ((cp - cm) / S) * v0(-x - cm * t),
        w,
    )
    v = np.where(reg4, v0(x - cp * t), v)
    v = np.where(
        reg3,
        (2.0 * cp / S) * v0((cm / cp) * (x - cp * t)) + ((cm - cp) / S) * w0(cp * t - x),
        v,
    )
    if not with_u:
        return v, w
    # u = u0 + (1/2) int_0^t (v+w) ds, panel-split at the region crossing time
    u = np.empty_like(v)
    flat_t, flat_x = t.ravel(), x.ravel()
    flat_u = np.empty_like(flat_t)
    nodes, wts = np.polynomial.legendre.leggauss(24)
    for i, (ti, xi) in enumerate(zip(flat_t, flat_x)):
        cross = -xi / cm if xi < 0 else xi / cp
        cuts = [0.0] + ([cross] if 0.0 < cross < ti else []) + [ti]
        acc = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            # subdivide each smooth piece so fixed-order GL resolves narrow data
            edges = np.linspace(a, b, 1 + max(1, int(np.ceil((b - a) / 0.1))))
            for a2, b2 in zip(edges[:-1], edges[1:]):
                ss = 0.5 * (a2 + b2) + 0.5 * (b2 - a2) * nodes
                vv, ww = connected_eval(cs, ss, np.full_like(ss, xi))
                acc += 0.5 * (b2 - a2) * np.sum(wts * 0.5 * (vv + ww))
        flat_u[i] = acc
    u = cs.u0(x) + flat_u.reshape(t.shape)
    return v, w, u


def transmission_residuals(cs: ConnectedSolution, t):
    """Interface residuals at x=0: continuity of v+w and of (w-v)/c."""
    cm, cp = cs.c_minus, cs.c_plus
    S = cm + cp
    t = np.asarray(t, dtype=float)
    v_m = cs.v0(-cm * t)
    w_p = cs.w0(cp * t)
    v_p = (2.0 * cp / S) * v_m + ((cm - cp) / S) * w_p
    w_m = (2.0 * cm / S) * w_p + ((cp - cm) / S) * v_m
    r1 = (v_p + w_p) - (v_m + w_m)
    r2 = (w_p - v_p) / cp - (w_m - v_m) / cm
    return r1, r2


def delta_solution_eval(c_minus: float, c_plus: float, t, x):
    """u for u0 = 0, u1 = delta(x+1) across the jump at x = 0."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    t, x = np.broadcast_arrays(t, x)
    cm, cp = c_minus, c_plus
    S = cm + cp
    H = _heaviside
    left = (1.0 / (2.0 * cm)) * (
        H(-x + cm * t - 1.0) * H(x + cm * t + 1.0) + ((cp - cm) / S) * H(x + cm * t - 1.0)
    )
    right = (1.0 / (2.0 * cm)) * (2.0 * cp / S) * H(-x + cp * t - cp / cm)
    out = np.where(x < 0.0, left, np.where(x > 0.0, right, 0.5 * (left + right)))
    return out if out.ndim else float(out)


def delta_plateau(c_minus: float, c_plus: float) -> float:
    """Common value of u in the sector above the ray crossing."""
    return c_plus / (c_minus * (c_plus + c_minus))


def delta_jump_locus(c_minus: float, c_plus: float):
    """Jump lines of delta_solution_eval as (label, x(t), t-range) triples."""
    cm, cp = c_minus, c_plus
    return [
        ("incident_left", lambda t: -1.0 - cm * np.asarray(t, dtype=float), (0.0, np.inf)),
        ("incident_right", lambda t: -1.0 + cm * np.asarray(t, dtype=float), (0.0, 1.0 / cm)),
        ("reflected", lambda t: 1.0 - cm * np.asarray(t, dtype=float), (1.0 / cm, np.inf)),
        ("transmitted", lambda t: -cp / cm + cp * np.asarray(t, dtype=float), (1.0 / cm, np.inf)),
    ]


@dataclass(frozen=True)
class PiecewiseTSolution:
    """Wave solution for a speed jump in time at t = t_jump.

    u(t,x) = F(x - c0 t) + G(x + c0 t) below the jump; above, both families
    re-expand with amplitudes fixed by continuity of (u, dt u):
        F~(x) = alpha F(x - c0 tj) + beta G(x + c0 tj)
        G~(x) = beta F(x - c0 tj) + alpha G(x + c0 tj)
    alpha = (c1+c0)/(2 c1), beta = (c1-c0)/(2 c1).
    """

    c0: float
    c1: float
    F: Callable
    G: Callable
    t_jump: float = 1.0

    @property
    def alpha(self) -> float:
        return (self.c1 + self.c0) / (2.0 * self.c1)

    @property
    def beta(self) -> float:
        return (self.c1 - self.c0) / (2.0 * self.c1)

    @staticmethod
    def from_data(c0, c1, u0, u1_antideriv, t_jump: float = 1.0):
        """Data u(0,·) = u0, dt u(0,·) = u1 with I1 = int_0^x u1."""
        F = lambda xi: 0.5 * u0(xi) - 0.5 / c0 * u1_antideriv(xi)
        G = lambda xi: 0.5 * u0(xi) + 0.5 / c0 * u1_antideriv(xi)
        return PiecewiseTSolution(c0, c1, F, G, t_jump)

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        t, x = np.broadcast_arrays(t, x)
        tj, c0, c1 = self.t_jump, self.c0, self.c1
        a, b = self.alpha, self.beta
        below = t <= tj
        u_lo = self.F(x - c0 * t) + self.G(x + c0 * t)
        s = np.where(below, 0.0, t - tj)
        xm, xp = x - c1 * s, x + c1 * s
        u_hi = (
            a * self.F(xm - c0 * tj)
            + b * self.G(xm + c0 * tj)
            + b * self.F(xp - c0 * tj)
            + a * self.G(xp + c0 * tj)
        )
        out = np.where(below, u_lo, u_hi)
        return out if out.ndim else float(out)


def three_region_limit(u0: Callable) -> Callable:
    """Distributional limit 'u0(x-t) for x>t; u0(0) for |x|<t; u0(x+t) for x<-t'."""

    def f(t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return np.where(x > t, u0(x - t), np.where(x < -t, u0(x + t), u0(np.zeros_like(x))))

    return f


def two_region_limit(u0: Callable) -> Callable:
    """Distributional limit 'u0(x+t) for x>0; u0(x-t) for x<0'."""

    def f(t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, u0(x + t), u0(x - t))

    return f


@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported product bump psi(t,x), unit mass."""

    __test__ = False  # not a pytest collectable despite the name

    t_center: float
    x_center: float
    radius: float
    mollifier: Mollifier = field(default_factory=Mollifier)

    def __call__(self, t, x):
        m, r = self.mollifier, self.radius
        return (
            phi_eval(m, (np.asarray(t, dtype=float) - self.t_center) / r)
            * phi_eval(m, (np.asarray(x, dtype=float) - self.x_center) / r)
            / r**2
        )

    def x_antideriv(self, t, x):
        """int_{-inf}^x psi(t, y) dy, closed form via the mollifier antiderivative."""
        m, r = self.mollifier, self.radius
        return (
            phi_eval(m, (np.asarray(t, dtype=float) - self.t_center) / r)
            * phi_antideriv(m, (np.asarray(x, dtype=float) - self.x_center) / r)
            / r
        )

    @property
    def l1_norm(self) -> float:
        return 1.0

    @property
    def t_support(self):
        return (self.t_center - self.radius, self.t_center + self.radius)

    @property
    def x_support(self):
        return (self.x_center - self.radius, self.x_center + self.radius)


@dataclass
class AssociationVerdict:
    eps: np.ndarray
    errors: np.ndarray
    tol: float
    passed: bool
    reason: str = ""


def associate_check(
    eps_values: Sequence[float],
    pairings: Sequence[float],
    target: float,
    tol: float = 1e-2,
    norm: float = 1.0,
) -> AssociationVerdict:
    """PASS when |pairing - target|/norm decreases over the last half and ends <= tol."""
    eps = np.asarray(eps_values, dtype=float)
    e = np.abs(np.asarray(pairings, dtype=float) - target) / norm
    order = np.argsort(-eps)
    eps, e = eps[order], e[order]
    half = e[len(e) // 2 :]
    decreasing = bool(np.all(np.diff(half) <= np.maximum(1e-12, 0.05 * half[:-1])))
    small = bool(e[-1] <= tol)
    reason = []
    if not decreasing:
        reason.append("errors not decreasing over the last half of the ladder")
    if not small:
        reason.append(f"final error {e[-1]:.3g} > tol {tol:.3g}")
    return AssociationVerdict(eps, e, tol, decreasing and small, "; ".join(reason))


def pair_delta_oracle(c_minus: float, c_plus: float, psi: TestFunction, n_panels: int = 200):
    """<u, psi> for the delta-data oracle by exact x-integration per time panel.

    For fixed t, u(t,·) is piecewise constant; the x-integral against psi is a
    finite sum of closed-form antiderivative differences.  The remaining
    t-integral is piecewise smooth with a few moving-breakpoint kinks and is
    done by dense Gauss-Legendre panels.
    """
    cm, cp = c_minus, c_plus
    t_lo, t_hi = psi.t_support
    t_lo = max(t_lo, 0.0)
    if t_hi <= t_lo:
        return 0.0
    nodes, wts = _GL8

    def x_slice(t):
        # breakpoints of u(t, .)
        bps = sorted({-1.0 - cm * t, -1.0 + cm * t, 1.0 - cm * t, -cp / cm + cp * t, 0.0})
        edges = [-np.inf] + bps + [np.inf]
        acc = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            if np.isfinite(a) and np.isfinite(b):
                midx = 0.5 * (a + b)
            elif np.isfinite(b):
                midx = b - 1.0
            else:
                midx = a + 1.0
            val = delta_solution_eval(cm, cp, t, midx)
            if val == 0.0:
                continue
            hi = psi.x_antideriv(t, b) if np.isfinite(b) else psi.x_antideriv(t, 1e30)
            lo = psi.x_antideriv(t, a) if np.isfinite(a) else 0.0
            acc += val * (hi - lo)
        return acc

    edges = np.linspace(t_lo, t_hi, n_panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        ss = 0.5 * (a + b) + 0.5 * (b - a) * nodes
        total += 0.5 * (b - a) * np.sum(wts * np.array([x_slice(s) for s in ss]))
    return total


def pair_gridded(times, xs, u, psi: TestFunction):
    """Trapezoid <u, psi> over a stored (time x space) field."""
    times = np.asarray(times, dtype=float)
    xs = np.asarray(xs, dtype=float)
    pv = psi(times[:, None], xs[None, :])
    vals = np.trapezoid(pv * np.asarray(u, dtype=float), xs, axis=1)
    return float(np.trapezoid(vals, times))

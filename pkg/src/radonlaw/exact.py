"""Closed-form entropy solutions for the power flux ``sgn p [(1+u)^p - 1]``.

Two problems are covered:

* unit Dirac datum at the origin (:class:`ExactSolution`), where for ``p < 0``
  an atom of mass ``max(1 - t, 0)`` coexists with the rarefaction
  ``(|p| t / x)^(1/(1-p)) - 1`` and a shock is born at ``t = 1``; for
  ``0 < p < 1`` the atom dissolves at once and a shock starts at ``t = 0``;
* the pulse datum ``(n/2) chi_(-1/n, 1/n)`` (:class:`PulseSolution`), whose
  solution is piecewise explicit until the breakdown time ``t_n`` and then
  follows a shock ``xi_n``.

Shock curves solve ``xi' = phi(u+)/u+`` with left state 0.  The start is
degenerate (``xi = 0``), so the first node is placed with the mass balance
and the rest is integrated with an adaptive Runge-Kutta method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicHermiteSpline

from . import flux as fluxlib
from .errors import BracketError, DomainError, IntegrationError
from .measure import RadonMeasure, indicator, total_mass, translate

BOOT = 1e-4
RTOL = 1e-11


def _exponent(p):
    return 1.0 / (1.0 - p)


def fan_value(p, t, y):
    """Rarefaction state ``(|p| t / y)^(1/(1-p)) - 1`` at distance ``y > 0``."""
    return np.expm1(_exponent(p) * np.log(abs(p) * t / np.asarray(y, dtype=float)))


def rh_speed(p, t, y):
    """Rankine-Hugoniot speed ``phi(u)/u`` against the zero state, with
    ``u = fan_value(p, t, y)``; the limit 0 is returned as ``y -> 0``."""
    if y <= 0:
        return 0.0
    lr = math.log(abs(p) * t / y)
    a = _exponent(p)
    # phi(u)/u = sgn p (B^p - 1)/(B - 1), B = (|p| t / y)^a
    num = math.copysign(1.0, p) * math.expm1(p * a * lr)
    den = math.expm1(a * lr)
    if den == 0:
        return abs(p)  # y = |p| t: u = 0 and phi(u)/u -> phi'(0)
    if math.isinf(den):
        return 0.0
    return num / den


def _fan_mass(p, t, y):
    """``int_y^{|p| t} [(|p| t / x)^a - 1] dx`` by the exact antiderivative."""
    a = _exponent(p)
    L = abs(p) * t
    if y >= L:
        return 0.0
    # (L^a x^(1-a))/(1-a) - x evaluated between y and L
    c = 1.0 - a
    return (L - L ** a * y ** c) / c - (L - y)


def _fan_primitive(p, t, y):
    """Antiderivative of ``(|p| t / y)^a - 1`` in ``y``, zero at ``y = 0``."""
    a = _exponent(p)
    c = 1.0 - a
    y = np.asarray(y, dtype=float)
    return (abs(p) * t) ** a * np.maximum(y, 0.0) ** c / c - y


def shock_from_mass_conservation(p, t):
    """Shock position of the Dirac problem located by mass balance.

    Solves ``fan mass on (xi, |p| t) + max(1 - t, 0) [p < 0] = 1`` by
    Brent's method.  Before the shock exists (``p < 0``, ``t <= 1``) returns 0.
    """
    if t <= 0:
        return 0.0
    atom = max(1.0 - t, 0.0) if p < 0 else 0.0
    if p < 0 and t <= 1:
        return 0.0
    L = abs(p) * t
    f = lambda y: _fan_mass(p, t, y) + atom - 1.0  # noqa: E731
    lo = L * 1e-300 if p > 0 else 0.0
    if p > 0:
        lo = L * 1e-12
        while f(lo) < 0 and lo > 1e-300:
            lo *= 1e-6
    flo, fhi = f(lo), f(L)
    if not (flo >= 0 >= fhi):
        raise BracketError(f"no sign change for p={p}, t={t}: f({lo})={flo}, f({L})={fhi}")
    if flo == 0:
        return lo
    return optimize.brentq(f, lo, L, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass
class ShockCurve:
    """Tabulated shock ``(t, xi)`` with cubic Hermite dense output.

    ``offset`` is the centre of the rarefaction the shock runs into
    (0 for the Dirac problem, ``1/n`` for the pulse problem).
    """

    p: float
    t: np.ndarray
    xi: np.ndarray
    dxi: np.ndarray
    offset: float = 0.0
    startup: str = "mass-balance bootstrap"
    max_rh_residual: float = 0.0
    _spline: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        self._spline = CubicHermiteSpline(self.t, self.xi, self.dxi)

    @property
    def t_start(self):
        return float(self.t[0])

    @property
    def t_end(self):
        return float(self.t[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_start - 1e-12) or np.any(t > self.t_end + 1e-12):
            raise DomainError(f"shock curve defined on [{self.t_start}, {self.t_end}]")
        out = self._spline(np.clip(t, self.t_start, self.t_end))
        return float(out) if out.ndim == 0 else out

    def speed(self, t):
        out = self._spline(np.asarray(t, dtype=float), 1)
        return float(out) if np.ndim(out) == 0 else out

    def rh_residuals(self, ts):
        """``|xi'(t) - phi(u+)/u+|`` at the given times (dense output)."""
        ts = np.asarray(ts, dtype=float)
        xs = self(ts)
        sp = self.speed(ts)
        rh = np.array([rh_speed(self.p, t, x - self.offset) for t, x in zip(ts, xs)])
        return np.abs(sp - rh)


def _integrate(p, t0, y0, T, offset, rtol, nodes_before=(), refine=16):
    rhs = lambda t, y: [rh_speed(p, t, y[0])]  # noqa: E731
    sol = integrate.solve_ivp(
        rhs, (t0, T), [y0], method="DOP853", rtol=rtol, atol=min(1e-14, 1e-3 * rtol * max(y0, 1e-300)),
        dense_output=True,
    )
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        ts = [n[0] for n in nodes_before] + list(sol.t)
        ys = [n[1] for n in nodes_before] + list(sol.y[0])
        table = np.column_stack([ts, np.asarray(ys) + offset])
        raise IntegrationError(f"shock integration failed: {sol.message}", table)
    # accepted steps are too far apart for cubic Hermite interpolation, so
    # each step is subdivided with the integrator's own high-order interpolant
    frac = np.linspace(0.0, 1.0, refine, endpoint=False)
    inner = (sol.t[:-1, None] + frac * np.diff(sol.t)[:, None]).ravel()
    inner = np.append(inner, sol.t[-1])
    ts = np.concatenate([[n[0] for n in nodes_before], inner])
    ys = np.concatenate([[n[1] for n in nodes_before], sol.sol(inner)[0]])
    dys = np.array([rh_speed(p, t, y) for t, y in zip(ts, ys)])
    curve = ShockCurve(p, ts, ys + offset, dys, offset=offset)
    # bootstrap nodes are mass-balance points; the residual is an ODE diagnostic
    mids = 0.5 * (inner[1:] + inner[:-1])
    curve.max_rh_residual = float(np.max(curve.rh_residuals(mids))) if mids.size else 0.0
    return curve


def integrate_shock(p, T, boot=BOOT, rtol=RTOL):
    """Shock curve of the Dirac problem on ``[t_start, T]``.

    ``t_start`` is 1 for ``p < 0`` and 0 for ``0 < p < 1``.  The node at
    ``t_start + boot`` comes from :func:`shock_from_mass_conservation`.
    """
    if p == 0 or p >= 1:
        raise DomainError("power exponent must satisfy p < 1, p != 0")
    t_start = 1.0 if p < 0 else 0.0
    if T <= t_start + boot:
        raise DomainError(f"horizon T={T} must exceed {t_start + boot}")
    t1 = t_start + boot
    y1 = shock_from_mass_conservation(p, t1)
    # the onset need not be smooth, so the bootstrap interval gets a
    # geometric ladder of mass-balance nodes for the interpolant
    ladder = t_start + boot * np.geomspace(1e-6, 1.0, 25)[:-1]
    nodes = [(t_start, 0.0)] + [(t, shock_from_mass_conservation(p, t)) for t in ladder]
    return _integrate(p, t1, y1, T, 0.0, rtol, nodes_before=nodes)


class ExactSolution:
    """Entropy solution of the Dirac problem ``u0 = delta_0``.

    ``eval(x, t)`` returns ``(u_r, atom_mass_at_origin)``.
    """

    def __init__(self, p, T):
        if p == 0 or p >= 1:
            raise DomainError("power exponent must satisfy p < 1, p != 0")
        self.p = float(p)
        self.T = float(T)
        self.flux = fluxlib.power(p)
        self.atoms = ((0.0, 1.0),)
        self._shock = None

    @property
    def shock(self):
        if self._shock is None:
            self._shock = integrate_shock(self.p, self.T)
        return self._shock

    @property
    def shock_birth(self):
        return 1.0 if self.p < 0 else 0.0

    def atom_mass(self, t):
        return max(1.0 - t, 0.0) if self.p < 0 else 0.0

    def left_edge(self, t):
        """Left end of the support of ``u_r`` (0 until the shock is born)."""
        if self.p < 0 and t <= 1:
            return 0.0
        return self.shock(t)

    def regular(self, x, t):
        if not 0 < t <= self.T:
            raise DomainError(f"t={t} outside (0, {self.T}]")
        x = np.asarray(x, dtype=float)
        lo = self.left_edge(t)
        hi = abs(self.p) * t
        if self.p < 0 and t <= 1:
            inside = (x > 0) & (x <= hi)
        else:
            inside = (x >= lo) & (x <= hi) & (x > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(inside, fan_value(self.p, t, np.where(inside, x, 1.0)), 0.0)
        return float(val) if val.ndim == 0 else val

    def eval(self, x, t):
        return self.regular(x, t), self.atom_mass(t)

    # shared sampled-solution interface
    def regular_at(self, x, t):
        return self.regular(x, t)

    def regular_mass(self, t):
        return _fan_mass(self.p, t, self.left_edge(t))

    def mass(self, t):
        return self.regular_mass(t) + self.atom_mass(t)

    def flux_integral(self, x, t1, t2):
        """``int_{t1}^{t2} phi(u_r(x, s)) ds`` by adaptive quadrature."""
        if t2 <= t1:
            return 0.0
        f = self.flux
        pts = [s for s in (x / abs(self.p) if x > 0 else None, self.shock_birth) if s is not None and t1 < s < t2]

        def integrand(s):
            if s <= 0:
                return 0.0
            return f(self.regular(x, s))

        val, _ = integrate.quad(integrand, t1, t2, points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-12)
        return val


def eval_exact(sol, x, t):
    return sol.eval(x, t)


def breakdown(n, p):
    """Breakdown time ``t_n`` and shock origin ``x_n`` of the pulse problem."""
    f = fluxlib.power(p)
    h = n / 2.0
    ph, dph = f(h), f.deriv(h)
    tn = 1.0 / (ph - h * dph)
    xn = (ph + h * dph) / (ph - h * dph) / n
    return tn, xn


class PulseSolution:
    """Entropy solution for the pulse datum ``(n/2) chi_(-1/n, 1/n)``."""

    def __init__(self, n, p, T):
        if p == 0 or p >= 1:
            raise DomainError("power exponent must satisfy p < 1, p != 0")
        self.n = int(n)
        self.p = float(p)
        self.T = float(T)
        self.flux = fluxlib.power(p)
        self.tn, self.xn = breakdown(self.n, self.p)
        self._shock = None

    @property
    def shock(self):
        if self._shock is None:
            if self.T <= self.tn:
                raise DomainError("no shock before the breakdown time")
            off = 1.0 / self.n
            self._shock = _integrate(self.p, self.tn, self.xn - off, self.T, off, RTOL)
            self._shock.startup = "breakdown point"
        return self._shock

    def __call__(self, x, t):
        if t < 0:
            raise DomainError("t must be nonnegative")
        if t > self.T + 1e-12:
            raise DomainError(f"t={t} beyond the horizon {self.T}")
        n, p = self.n, self.p
        x = np.asarray(x, dtype=float)
        a = abs(p)
        head = a * t + 1.0 / n
        out = np.zeros_like(x)
        if t <= self.tn:
            tail = (2.0 / (n + 2)) ** (1 - p) * a * t + 1.0 / n
            s = 2.0 * math.copysign(1.0, p) / n * (((n + 2) / 2.0) ** p - 1.0)
            left = s * t - 1.0 / n
            fan = (x < head) & (x >= tail)
            plateau = (x < tail) & (x >= left)
            out[plateau] = n / 2.0
        else:
            xi = self.shock(t)
            fan = (x < head) & (x >= xi)
        if t > 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                y = np.where(fan, x - 1.0 / n, 1.0)
                out = np.where(fan, fan_value(p, t, y), out)
        else:
            out = np.where((x > -1.0 / n) & (x < 1.0 / n), n / 2.0, 0.0)
        return float(out) if out.ndim == 0 else out

    def regular_at(self, x, t):
        return self(x, t)

    def breaks(self, t):
        """``(left, tail, head)`` of the profile: zero left of ``left``, the
        plateau ``n/2`` up to ``tail``, the fan up to ``head``.  After
        breakdown ``tail == left`` is the shock position."""
        n, p = self.n, self.p
        head = abs(p) * t + 1.0 / n
        if t <= self.tn:
            tail = (2.0 / (n + 2)) ** (1 - p) * abs(p) * t + 1.0 / n
            left = 2.0 * math.copysign(1.0, p) / n * (((n + 2) / 2.0) ** p - 1.0) * t - 1.0 / n
            return left, tail, head
        xi = self.shock(t)
        return xi, xi, head

    def cell_averages(self, grid, t):
        """Exact cell averages on ``grid`` (closed-form antiderivative of the fan)."""
        n, p = self.n, self.p
        e = grid.edges
        if t == 0:
            return indicator(grid, -1.0 / n, 1.0 / n, n / 2.0)
        left, tail, head = self.breaks(t)
        plateau = indicator(grid, left, tail, n / 2.0)
        lo = np.clip(e[:-1], tail, head) - 1.0 / n
        hi = np.clip(e[1:], tail, head) - 1.0 / n
        return plateau + (_fan_primitive(p, t, hi) - _fan_primitive(p, t, lo)) / grid.dx


def rn_exact(n, p, x, t, T=None):
    """Pointwise value of the pulse-problem solution (convenience wrapper)."""
    return PulseSolution(n, p, T if T is not None else max(t, 1.0))(x, t)


class FrozenDiracSolution:
    """Entropy solution that keeps the atoms intact: the bounded solution
    for the regular part of ``u0`` plus atoms carried along ``x_l + C_phi t``.

    It satisfies the entropy inequalities but not the blow-up condition near
    the atoms, which is what distinguishes it from the constructed solution.
    """

    def __init__(self, u0, flux, regular):
        self.u0 = u0
        self.flux = flux
        self.regular = regular  # GridSolution of the regular datum
        self.cphi = flux.cphi

    @property
    def times(self):
        return self.regular.times

    @property
    def atoms(self):
        return self.u0.atoms

    def atoms_at(self, t):
        return tuple((x + self.cphi * t, c) for x, c in self.u0.atoms)

    def regular_at(self, x, t):
        return self.regular.regular_at(x, t)

    def measure_at(self, t):
        reg = RadonMeasure(self.regular.grid, self.regular.at(t), ())
        return RadonMeasure(reg.grid, reg.density, self.atoms_at(t))

    def mass(self, t):
        return total_mass(self.measure_at(t))


def frozen_dirac_solution(u0, flux, cfg):
    """Build the frozen-atom witness with the finite-volume solver."""
    from .solver import run

    dens = u0.with_grid(cfg.grid).density_on(cfg.grid)
    reg = run(dens, flux, cfg, level=None, datum_id="frozen-regular")
    return FrozenDiracSolution(u0, flux, reg)


__all__ = [
    "ExactSolution",
    "FrozenDiracSolution",
    "PulseSolution",
    "ShockCurve",
    "breakdown",
    "eval_exact",
    "fan_value",
    "frozen_dirac_solution",
    "integrate_shock",
    "rh_speed",
    "rn_exact",
    "shock_from_mass_conservation",
    "translate",
]

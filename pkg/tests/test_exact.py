import math

import numpy as np
import pytest

from radonlaw import flux as fluxlib
from radonlaw.errors import DomainError
from radonlaw.exact import (
    ExactSolution,
    PulseSolution,
    breakdown,
    eval_exact,
    integrate_shock,
    rn_exact,
    shock_from_mass_conservation,
)
from radonlaw.measure import Grid

# Closed-form shock curves obtained by hand from mass balance on the fan:
#   p = -1:  (sqrt t - sqrt xi)^2 = 1              ->  xi = (sqrt t - 1)^2, t >= 1
#   p = 1/2: xi^2 - (t + 1) xi + t^2 / 4 = 0      ->  xi = ((1 + t) - sqrt(1 + 2t)) / 2
XI_BURGERS = lambda t: (np.sqrt(t) - 1.0) ** 2  # noqa: E731
XI_SQRT = lambda t: ((1.0 + t) - np.sqrt(1.0 + 2.0 * t)) / 2.0  # noqa: E731


@pytest.fixture(scope="module")
def sol_m1():
    return ExactSolution(-1.0, 6.0)


@pytest.fixture(scope="module")
def sol_half():
    return ExactSolution(0.5, 4.0)


def test_eval_exact_before_shock(sol_m1):
    # fan (t/x)^(1/2) - 1 at (0.25, 0.5) and atom 1 - t
    u, c = eval_exact(sol_m1, 0.25, 0.5)
    assert u == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-14)
    assert c == 0.5
    assert eval_exact(sol_m1, 0.75, 0.5)[0] == 0.0  # beyond |p| t
    assert eval_exact(sol_m1, -0.1, 0.5)[0] == 0.0
    assert sol_m1.atom_mass(1.5) == 0.0


def test_shock_closed_form_p_minus_one(sol_m1):
    ts = np.linspace(1.001, 6.0, 400)
    assert np.max(np.abs(sol_m1.shock(ts) - XI_BURGERS(ts))) < 1e-8
    assert sol_m1.shock(4.0) == pytest.approx(1.0, abs=1e-8)


def test_shock_closed_form_p_half(sol_half):
    ts = np.linspace(0.001, 4.0, 400)
    assert np.max(np.abs(sol_half.shock(ts) - XI_SQRT(ts))) < 1e-8


@pytest.mark.parametrize("p", [-1.0, -0.5, -2.0, -4.0, 0.5, 0.25, 0.9])
def test_shock_satisfies_rankine_hugoniot(p):
    curve = integrate_shock(p, 5.0)
    assert curve.max_rh_residual <= 1e-6
    ts = np.linspace(curve.t_start + 0.01, 5.0, 257)
    assert np.max(curve.rh_residuals(ts)) <= 1e-6


@pytest.mark.parametrize("p", [-1.0, -0.5, 0.5])
def test_ode_agrees_with_mass_balance(p):
    curve = integrate_shock(p, 5.0)
    for t in np.linspace(curve.t_start + 0.05, 5.0, 12):
        assert curve(t) == pytest.approx(shock_from_mass_conservation(p, t), abs=1e-4)


@pytest.mark.parametrize("p", [-1.0, -0.5, 0.5])
def test_mass_is_conserved(p):
    sol = ExactSolution(p, 5.0)
    for t in (0.3, 0.9, 1.0, 1.7, 5.0):
        assert sol.mass(t) == pytest.approx(1.0, abs=1e-8)


def test_atom_loses_mass_through_the_flux(sol_m1):
    # c(t) = 1 + Phi(0-) - Phi(0+) with Phi(0-) = 0 and phi(u_r(0+, s)) -> gamma = 1
    for t in (0.25, 0.5, 0.9):
        out = sol_m1.flux_integral(1e-14, 0.0, t)
        assert sol_m1.atom_mass(t) == pytest.approx(1.0 - out, abs=1e-5)


def test_exact_domain_errors(sol_m1):
    with pytest.raises(DomainError):
        ExactSolution(1.0, 1.0)
    with pytest.raises(DomainError):
        sol_m1.regular(0.1, 7.0)
    with pytest.raises(DomainError):
        sol_m1.shock(0.5)


def test_breakdown_values():
    # n = 2, p = -1: h = 1, phi(1) = 1/2, phi'(1) = 1/4
    assert breakdown(2, -1.0) == pytest.approx((4.0, 1.5))
    for n in (2, 8, 64):
        tn, xn = breakdown(n, 0.5)
        assert tn > 0 and xn > 1.0 / n


def test_pulse_shock_closed_form():
    # the fan centred at 1/n = 1/2 is the p = -1 Dirac fan shifted by 1/2
    ps = PulseSolution(2, -1.0, 9.0)
    ts = np.linspace(4.0, 9.0, 200)
    assert np.max(np.abs(ps.shock(ts) - (0.5 + XI_BURGERS(ts)))) < 1e-8
    assert ps.shock.max_rh_residual <= 1e-6


@pytest.mark.parametrize("n,p", [(2, -1.0), (8, -0.5), (4, 0.5)])
def test_pulse_cell_averages_conserve_mass(n, p):
    ps = PulseSolution(n, p, 3.0)
    g = Grid.covering(-1.0, 5.0, 2.0**-8)
    for t in (0.0, 0.5, min(ps.tn, 3.0) * 0.99, 3.0):
        assert np.sum(ps.cell_averages(g, t)) * g.dx == pytest.approx(1.0, abs=1e-8)


def test_pulse_profile_is_continuous_at_the_breaks():
    ps = PulseSolution(8, -1.0, 1.0)
    left, tail, head = ps.breaks(0.5)
    assert left < tail < head
    assert ps(tail + 1e-12, 0.5) == pytest.approx(4.0, rel=1e-6)
    assert ps(head - 1e-12, 0.5) == pytest.approx(0.0, abs=1e-6)


def test_pulse_tends_to_dirac_solution(sol_m1):
    n = 2**12
    for x, t in ((0.25, 0.5), (0.1, 0.9), (2.0, 4.0)):
        assert rn_exact(n, -1.0, x, t, T=6.0) == pytest.approx(eval_exact(sol_m1, x, t)[0], abs=1e-2)



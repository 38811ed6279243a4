import math

import numpy as np
import pytest

from radonlaw import flux as fluxlib
from radonlaw.analysis import (
    KruzkovPair,
    _extrapolate,
    aronson_benilan_check,
    blowup_bound_check,
    entropy_check,
    estimate_waiting_time,
    flux_time_integral,
    galilean_shift_check,
    kruzkov_residual,
    mass_check,
    max_principle_check,
    monotone_singular_mass_check,
    nonuniqueness_contrast,
    singular_mass,
    singular_mass_estimate,
    support_nullity_diagnostic,
    waiting_time_bounds,
)
from radonlaw.errors import PreconditionError, UnsupportedFluxError
from radonlaw.exact import ExactSolution, frozen_dirac_solution
from radonlaw.measure import Grid, RadonMeasure, SpaceTimeTest, TestFunction, dirac_regularize, indicator
from radonlaw.solver import GridSolution, SolverConfig, run

DELTA = RadonMeasure.dirac(0.0, 1.0)


@pytest.fixture(scope="module")
def exact_m1():
    return ExactSolution(-1.0, 3.0)


@pytest.fixture(scope="module")
def dirac_runs():
    """Three pulse levels for u0 = delta_0 and phi = u / (1 + u)."""
    f = fluxlib.power(-1.0)
    g = Grid.covering(-0.05, 1.9, 2.0**-10)
    cfg = SolverConfig(g, T=1.5, n_snapshots=30)
    return [
        run(dirac_regularize(DELTA, n, g, min_cells=2), f, cfg, level=n, atoms=DELTA.atoms)
        for n in (2**6, 2**8, 2**9)
    ]


def test_extrapolation_is_exact_for_linear_and_power_profiles():
    a, b = 0.7, 3.0
    ms = [a + b * d for d in (1e-3, 2e-3, 4e-3)]
    assert _extrapolate(ms, 1.0)[0] == pytest.approx(a, abs=1e-14)
    ms = [a - b * d**0.5 for d in (1e-3, 2e-3, 4e-3)]
    val, q, low = _extrapolate(ms, 1.0, order="auto")
    assert val == pytest.approx(a, abs=1e-12) and q == pytest.approx(0.5)
    assert not low


def test_exact_singular_mass(exact_m1):
    # atom mass 1 - t for t <= 1
    for t, c in ((0.25, 0.75), (0.5, 0.5), (0.9, 0.1), (1.5, 0.0)):
        assert singular_mass(exact_m1, 0.0, t) == pytest.approx(c, abs=1e-4)
    with pytest.raises(PreconditionError):
        singular_mass(exact_m1, 0.3, 0.5)


def test_flux_time_integral_on_exact_solution(exact_m1):
    # phi(u_r(x, s)) = 1 - (s/x)^(-1/2) while s >= x, so int_x^t = (t - x) - 2 sqrt(x)(sqrt t - sqrt x)
    x, t = 0.2, 0.8
    ref = (t - x) - 2 * math.sqrt(x) * (math.sqrt(t) - math.sqrt(x))
    assert flux_time_integral(exact_m1, x, 0.0, t).value == pytest.approx(ref, abs=1e-10)


def test_grid_singular_mass_follows_the_atom_law(dirac_runs):
    top = dirac_runs[-1]
    for t in (0.25, 0.5, 0.75):
        assert singular_mass(top, 0.0, t) == pytest.approx(1.0 - t, abs=0.05)
    assert singular_mass(top, 0.0, 1.5) <= 0.05
    est = singular_mass_estimate(top, 0.0, 0.5)
    assert len(est.window_masses) == 3 and 0.0 <= est.value <= 1.0
    assert monotone_singular_mass_check(top, 0.0).passed


def test_waiting_time_bounds():
    f = fluxlib.power(-1.0)
    assert waiting_time_bounds(f, ((0.0, 1.0),), T=5.0) == (1.0, 1.0)
    # phi bounded by 1 and an atom of mass 2
    lo, _ = waiting_time_bounds(f, ((0.0, 2.0),), T=10.0)
    assert lo == 2.0
    # exponential flux: H = -1, so the upper bound is unavailable
    lo, hi = waiting_time_bounds(fluxlib.exponential(1.0), ((0.0, 1.0),), T=5.0)
    assert lo == 1.0 and hi == math.inf
    # unbounded flux: atoms vanish instantly
    assert waiting_time_bounds(fluxlib.power(0.5), ((0.0, 1.0),), T=1.0) == (0.0, 0.0)


def test_waiting_time_estimate_on_coarse_runs(dirac_runs):
    rep = estimate_waiting_time(dirac_runs)
    assert rep.lower_bound == 1.0 and rep.upper_bound == 1.0
    assert rep.t0_estimate is not None and abs(rep.t0_estimate - 1.0) <= 0.2
    with pytest.raises(PreconditionError):
        estimate_waiting_time(dirac_runs[:2])


def _fake_run(f, g, times, profile):
    snaps = np.array([profile(g.centers, t) for t in times])
    cfg = SolverConfig(g, T=float(times[-1]), snapshot_times=times)
    return GridSolution(g, f, cfg, None, "fake", np.asarray(times), snaps, np.zeros((len(times), g.n_cells + 1)))


def test_kruzkov_residual_vanishes_on_constant_state():
    f = fluxlib.power(-1.0)
    g = Grid.covering(-1.0, 1.0, 2.0**-8)
    sol = _fake_run(f, g, np.linspace(0, 1, 11), lambda x, t: np.full_like(x, 2.0))
    zeta = SpaceTimeTest(TestFunction(-0.5, 0.5), 0.0, 0.8)
    for k in (0.0, 1.0, 2.0, 3.0):
        assert kruzkov_residual(sol, KruzkovPair(k, f), zeta) == pytest.approx(0.0, abs=1e-12)


def test_kruzkov_residual_flags_expansion_shock():
    # phi(1)/1 = 1/2; a rising jump 0 -> 1 is admissible, a falling one is not
    f = fluxlib.power(-1.0)
    g = Grid.covering(-1.0, 2.0, 2.0**-10)
    times = np.linspace(0, 1, 201)
    good = _fake_run(f, g, times, lambda x, t: (x > 0.5 * t).astype(float))
    bad = _fake_run(f, g, times, lambda x, t: (x < 0.5 * t).astype(float))
    zeta = SpaceTimeTest(TestFunction(-0.5, 1.0), 0.0, 0.9)
    pair = KruzkovPair(0.5, f)
    tol = 10 * g.dx
    assert kruzkov_residual(good, pair, zeta) >= -tol
    assert kruzkov_residual(bad, pair, zeta) < -0.01


def test_entropy_check_on_pulse_runs(dirac_runs):
    rep = entropy_check(dirac_runs[0], n_levels=4, n_tests=5)
    assert rep.passed, rep.margin


def test_aronson_benilan(exact_m1, dirac_runs):
    xs = np.linspace(0.05, 0.5, 10)
    rep = aronson_benilan_check(exact_m1, times=(0.5, 1.0), xs=xs)
    assert rep.passed and abs(rep.margin) <= 1e-12  # the fan saturates the bound
    for r in dirac_runs:
        assert aronson_benilan_check(r, times=(0.5, 1.0)).passed
        same = aronson_benilan_check(r, times=(0.7, 0.7))
        assert same.margin == 0.0
    with pytest.raises(UnsupportedFluxError):
        aronson_benilan_check(exact_m1, flux=fluxlib.linear(1.0), xs=xs)


def test_blowup_bound_and_witness(exact_m1):
    f = exact_m1.flux
    xs = [0.01, 0.05, 0.2]
    rep = blowup_bound_check(exact_m1, f, 0.0, 0.5, xs=xs)
    assert rep.passed and abs(rep.margin) <= 1e-8
    g = Grid.covering(-0.5, 1.5, 2.0**-8)
    witness = frozen_dirac_solution(DELTA, f, SolverConfig(g, T=1.0, n_snapshots=4))
    assert witness.mass(0.5) == 1.0
    contrast = nonuniqueness_contrast(exact_m1, witness, f, 0.0, 0.5, xs=xs)
    assert contrast.passed
    assert not contrast.evidence["witness"]["pass"]


def test_galilean_shift():
    f = fluxlib.power(-1.0, drift=0.25)
    g = Grid.covering(-1.0, 3.0, 2.0**-8)
    u0 = indicator(g, -0.25, 0.25, 2.0)
    assert galilean_shift_check(u0, f, SolverConfig(g, T=1.0, n_snapshots=10)).passed


def test_support_nullity_and_bookkeeping(dirac_runs):
    meas = support_nullity_diagnostic(dirac_runs, 0.5, threshold=lambda n: 0.25 * n)
    levels = sorted(meas)
    assert meas[levels[-1]] <= meas[levels[0]]
    for r in dirac_runs:
        assert mass_check(r).passed
        assert max_principle_check(r).passed

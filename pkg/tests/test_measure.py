import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radonlaw.errors import DomainError, ResolutionError
from radonlaw.measure import (
    Grid,
    RadonMeasure,
    SpaceTimeTest,
    TestFunction,
    dirac_regularize,
    from_config,
    indicator,
    pair,
    parse_datum,
    total_mass,
    translate,
    window_mass,
)


def test_grid_geometry():
    g = Grid.covering(-0.01, 2.3, 2.0**-4)
    assert g.dx == 2.0**-4
    assert g.x_min <= -0.01 and g.x_max >= 2.3
    assert g.edges.size == g.n_cells + 1
    assert np.allclose(np.diff(g.centers), g.dx)
    assert g.cell_index(g.centers[3]) == 3


def test_measure_validation(unit_grid):
    with pytest.raises(DomainError):
        RadonMeasure(atoms=((0.0, -1.0),))
    with pytest.raises(DomainError):
        RadonMeasure(atoms=((0.5, 1.0), (0.0, 1.0)))
    with pytest.raises(DomainError):
        RadonMeasure(unit_grid, -unit_grid.zeros() - 1)


def test_masses_and_windows(unit_grid):
    dens = indicator(unit_grid, -0.5, 0.25, 2.0)
    m = RadonMeasure(unit_grid, dens, ((0.0, 1.0), (0.5, 0.25)))
    assert m.singular_mass == 1.25
    assert m.regular_mass == pytest.approx(1.5, abs=1e-14)
    assert total_mass(m) == pytest.approx(2.75, abs=1e-14)
    # [-0.1, 0.1]: density 2 * 0.2 plus the atom at 0
    assert window_mass(m, -0.1, 0.1) == pytest.approx(1.4, abs=1e-14)


def test_translate_moves_atoms_and_density(unit_grid):
    m = RadonMeasure(unit_grid, indicator(unit_grid, -0.5, 0.0), ((0.0, 1.0),))
    s = translate(m, 0.25)
    assert s.atoms == ((0.25, 1.0),)
    assert total_mass(s) == pytest.approx(total_mass(m), abs=1e-13)
    assert window_mass(s, -0.25, 0.25) == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(DomainError):
        translate(m, 1.25)


def test_pair_with_bump(unit_grid):
    rho = TestFunction(-0.5, 0.5)
    m = RadonMeasure.dirac(0.0, 2.0)
    assert pair(m, rho) == pytest.approx(2.0 * rho(0.0))
    dens = RadonMeasure(unit_grid, np.ones(unit_grid.n_cells))
    # midpoint rule for a smooth bump is accurate to O(dx^2)
    xs = np.linspace(-0.5, 0.5, 20001)
    assert pair(dens, rho) == pytest.approx(np.trapezoid(rho(xs), xs), rel=1e-3)


def test_dirac_regularize_conserves_mass_exactly():
    g = Grid.covering(-1.0, 1.0, 2.0**-10)
    m = RadonMeasure.dirac(0.0, 1.0)
    for n in (2, 16, 256):
        u = dirac_regularize(m, n, g)
        assert np.sum(u) * g.dx == 1.0
        assert u.max() == pytest.approx(n / 2.0)
    with pytest.raises(ResolutionError):
        dirac_regularize(m, 2**10, g)
    assert np.sum(dirac_regularize(m, 2**10, g, min_cells=2)) * g.dx == 1.0


def test_test_functions():
    rho = TestFunction(0.0, 1.0)
    assert rho(-0.1) == 0.0 and rho(1.1) == 0.0
    assert rho(0.5) == pytest.approx(1.0)
    h = 1e-6
    x = 0.3
    assert rho.dx(x) == pytest.approx((rho(x + h) - rho(x - h)) / (2 * h), rel=1e-6)
    assert rho.c1_norm >= 1.0
    z = SpaceTimeTest(rho, 0.2, 0.8)
    assert z.tau(0.0) == 0.0 and z.tau(1.0) == 0.0 and z.tau(0.5) > 0


def test_config_roundtrip(unit_grid):
    spec = parse_datum("dirac:0:1+dirac:0.5:0.25+indicator:-0.5:0.25:2")
    assert spec["atoms"] == [[0.0, 1.0], [0.5, 0.25]]
    m = from_config(spec, unit_grid)
    m2 = from_config(m.to_config(), unit_grid)
    assert m2.atoms == m.atoms
    assert np.array_equal(m2.density, m.density)
    with pytest.raises(DomainError):
        parse_datum("gauss:0:1")


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-0.3, 0.3), masses=st.lists(st.floats(0, 5), min_size=1, max_size=4))
def test_translation_preserves_mass(a, masses):
    g = Grid.covering(-1.0, 1.0, 2.0**-6)
    atoms = tuple((-0.5 + 0.25 * i, c) for i, c in enumerate(masses))
    m = RadonMeasure(g, indicator(g, -0.25, 0.25), atoms)
    assert total_mass(translate(m, a)) == pytest.approx(total_mass(m), abs=1e-12)
